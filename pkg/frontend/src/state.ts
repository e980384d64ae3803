// Pure state transitions for the practice loop.  The legal phase order is
// idle -> uploading -> processing -> done; errors fall back to idle with an
// inline message so the user can retry.

import { Attempt, Sign, UiSessionState, Verdict, ReplayData } from './types.js';

export function withSigns(state: UiSessionState, signs: Sign[]): UiSessionState {
  return { ...state, signs, error: null };
}

export function selectSign(state: UiSessionState, signId: string): UiSessionState {
  // Switching signs discards the previous attempt outcome.
  return {
    ...state,
    selectedSignId: signId,
    phase: 'idle',
    attemptId: null,
    verdict: null,
    replay: null,
    error: null,
  };
}

export function startUpload(state: UiSessionState): UiSessionState {
  if (state.selectedSignId === null) {
    return { ...state, error: 'select a sign before submitting an attempt' };
  }
  return { ...state, phase: 'uploading', verdict: null, replay: null, error: null };
}

export function uploadAccepted(state: UiSessionState, attemptId: string): UiSessionState {
  return { ...state, phase: 'processing', attemptId };
}

export function attemptFinished(state: UiSessionState, attempt: Attempt): UiSessionState {
  return {
    ...state,
    phase: 'done',
    verdict: attempt.verdict,
    replay: attempt.replay ?? null,
    error: null,
  };
}

export function attemptFailed(state: UiSessionState, message: string): UiSessionState {
  // Recoverable: back to idle with the error shown inline.
  return { ...state, phase: 'idle', attemptId: null, error: message };
}

export function verdictVisible(state: UiSessionState): Verdict | null {
  // Invariant: a verdict is shown only in the done phase.
  return state.phase === 'done' ? state.verdict : null;
}

export function replayVisible(state: UiSessionState): ReplayData | null {
  return state.phase === 'done' ? state.replay : null;
}
