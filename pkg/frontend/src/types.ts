// Payload shapes of the tutor HTTP API; the UI consumes these verbatim and
// holds no pipeline logic of its own.

export interface Sign {
  id: string;
  name: string;
  manual: string;
  nonmanual: string;
  group: string;
  clip_url: string | null;
}

export type VerdictKind = 'ok' | 'false' | 'head_ok_hands_false';

export interface Verdict {
  kind: VerdictKind;
  text: string;
  manual_ok: boolean;
  head_ok: boolean;
  explanation: string;
}

export interface ReplayData {
  left: [number, number][];
  right: [number, number][];
  head: { energy: number[]; vx: number[]; vy: number[] };
}

export interface Attempt {
  id: string;
  status: 'processing' | 'done' | 'failed';
  target?: string;
  verdict: Verdict | null;
  replay?: ReplayData | null;
}

export type AttemptPhase = 'idle' | 'uploading' | 'processing' | 'done';

export interface UiSessionState {
  signs: Sign[];
  selectedSignId: string | null;
  phase: AttemptPhase;
  attemptId: string | null;
  verdict: Verdict | null;
  replay: ReplayData | null;
  error: string | null; // surfaced inline; a retry is always offered
}

export const initialState: UiSessionState = {
  signs: [],
  selectedSignId: null,
  phase: 'idle',
  attemptId: null,
  verdict: null,
  replay: null,
  error: null,
};
