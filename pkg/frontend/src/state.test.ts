import { describe, expect, it } from 'vitest';

import {
  attemptFailed,
  attemptFinished,
  selectSign,
  startUpload,
  uploadAccepted,
  verdictVisible,
  withSigns,
} from './state.js';
import { Attempt, Sign, initialState } from './types.js';

const SIGNS: Sign[] = [
  { id: 'here', name: 'here', manual: 'circle', nonmanual: 'nod', group: 'here', clip_url: null },
  { id: 'not-here', name: 'not here', manual: 'circle', nonmanual: 'shake', group: 'here', clip_url: null },
];

const DONE_ATTEMPT: Attempt = {
  id: 'a1',
  status: 'done',
  verdict: { kind: 'ok', text: 'ok', manual_ok: true, head_ok: true, explanation: '' },
  replay: { left: [[0, 0]], right: [[1, 1]], head: { energy: [0], vx: [0], vy: [0] } },
};

describe('practice state machine', () => {
  it('follows idle -> uploading -> processing -> done', () => {
    let s = withSigns(initialState, SIGNS);
    s = selectSign(s, 'here');
    expect(s.phase).toBe('idle');
    s = startUpload(s);
    expect(s.phase).toBe('uploading');
    s = uploadAccepted(s, 'a1');
    expect(s.phase).toBe('processing');
    expect(s.attemptId).toBe('a1');
    s = attemptFinished(s, DONE_ATTEMPT);
    expect(s.phase).toBe('done');
    expect(s.verdict?.kind).toBe('ok');
  });

  it('shows a verdict only in the done phase', () => {
    let s = withSigns(initialState, SIGNS);
    s = selectSign(s, 'here');
    s = startUpload(s);
    s = uploadAccepted(s, 'a1');
    // Even if a verdict sneaks into state early, nothing is visible yet.
    expect(verdictVisible(s)).toBeNull();
    s = attemptFinished(s, DONE_ATTEMPT);
    expect(verdictVisible(s)).not.toBeNull();
  });

  it('refuses to upload without a selected sign', () => {
    const s = startUpload(withSigns(initialState, SIGNS));
    expect(s.phase).toBe('idle');
    expect(s.error).toMatch(/select a sign/);
  });

  it('recovers from a failure back to idle with the error inline', () => {
    let s = selectSign(withSigns(initialState, SIGNS), 'here');
    s = uploadAccepted(startUpload(s), 'a1');
    s = attemptFailed(s, 'network failure: boom');
    expect(s.phase).toBe('idle');
    expect(s.error).toContain('boom');
    // Retry is possible: a new upload clears the error.
    s = startUpload(s);
    expect(s.phase).toBe('uploading');
    expect(s.error).toBeNull();
  });

  it('switching signs discards the previous verdict', () => {
    let s = selectSign(withSigns(initialState, SIGNS), 'here');
    s = attemptFinished(uploadAccepted(startUpload(s), 'a1'), DONE_ATTEMPT);
    s = selectSign(s, 'not-here');
    expect(s.phase).toBe('idle');
    expect(s.verdict).toBeNull();
    expect(verdictVisible(s)).toBeNull();
  });
});
