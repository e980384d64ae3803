import { describe, expect, it } from 'vitest';

import { render, verdictBanner } from './render.js';
import {
  attemptFailed,
  attemptFinished,
  selectSign,
  startUpload,
  uploadAccepted,
  withSigns,
} from './state.js';
import { Attempt, Sign, Verdict, initialState } from './types.js';

const SIGNS: Sign[] = [
  { id: 'here', name: 'here', manual: 'circle', nonmanual: 'nod', group: 'here', clip_url: '/api/signs/here/clip' },
  { id: 'not-here', name: 'not here', manual: 'circle', nonmanual: 'shake', group: 'here', clip_url: null },
];

function verdict(kind: Verdict['kind'], text: string, manual_ok: boolean, head_ok: boolean): Verdict {
  return { kind, text, manual_ok, head_ok, explanation: `details for ${kind}` };
}

function doneState(v: Verdict) {
  const attempt: Attempt = {
    id: 'a1',
    status: 'done',
    verdict: v,
    replay: {
      left: [[0, 0], [0.5, 0.2], [1, 0.4]],
      right: [[0, 0], [-0.2, 0.3]],
      head: { energy: [0, 0.2, 0.1], vx: [0, 0, 0], vy: [0, 0.05, -0.05] },
    },
  };
  let s = selectSign(withSigns(initialState, SIGNS), 'here');
  s = uploadAccepted(startUpload(s), 'a1');
  return attemptFinished(s, attempt);
}

describe('render', () => {
  it('renders all three verdict phrasings verbatim', () => {
    const cases: [Verdict['kind'], string, boolean, boolean][] = [
      ['ok', 'ok', true, true],
      ['false', 'false', false, false],
      ['head_ok_hands_false', 'head is ok but hands are false', false, true],
    ];
    for (const [kind, text, manualOk, headOk] of cases) {
      const html = render(doneState(verdict(kind, text, manualOk, headOk)));
      expect(html).toContain(`<strong>${text}</strong>`);
    }
  });

  it('is a pure function of the state (snapshot-stable)', () => {
    const state = doneState(verdict('ok', 'ok', true, true));
    expect(render(state)).toBe(render(state));
    expect(render(state)).toMatchSnapshot();
  });

  it('shows the reference clip for the selected sign', () => {
    const s = selectSign(withSigns(initialState, SIGNS), 'here');
    const html = render(s);
    expect(html).toContain('video');
    expect(html).toContain('/api/signs/here/clip');
    const other = render(selectSign(s, 'not-here'));
    expect(other).toContain('no reference clip');
  });

  it('disables the try button while an attempt is in flight', () => {
    let s = selectSign(withSigns(initialState, SIGNS), 'here');
    expect(render(s)).not.toContain('<button id="try-button" disabled');
    s = startUpload(s);
    expect(render(s)).toContain('uploading attempt');
    s = uploadAccepted(s, 'a1');
    expect(render(s)).toContain('analyzing attempt');
    expect(render(s)).toContain('<button id="try-button" disabled');
  });

  it('never shows a verdict before the done phase', () => {
    let s = selectSign(withSigns(initialState, SIGNS), 'here');
    s = uploadAccepted(startUpload(s), 'a1');
    const html = render(s);
    expect(html).toContain('no result yet');
    expect(html).not.toContain('verdict-ok');
  });

  it('renders an inline error with a retry control', () => {
    let s = selectSign(withSigns(initialState, SIGNS), 'here');
    s = attemptFailed(s, 'network failure: poll died');
    const html = render(s);
    expect(html).toContain('poll died');
    expect(html).toContain('retry-button');
  });

  it('draws the trajectory overlay and head strip chart from replay data', () => {
    const html = render(doneState(verdict('ok', 'ok', true, true)));
    expect(html).toContain('class="overlay"');
    expect(html).toContain('class="hand-left"');
    expect(html).toContain('class="stripchart"');
    expect(html).toContain('head-vy');
  });

  it('escapes hostile text in explanations', () => {
    const nasty = verdict('false', 'false', false, false);
    nasty.explanation = '<script>alert(1)</script>';
    const html = verdictBanner(nasty);
    expect(html).not.toContain('<script>');
    expect(html).toContain('&lt;script&gt;');
  });
});
