// Thin client for the tutor service.  fetch is injectable so tests can run
// against a scripted fake without a browser or a server.

import { Attempt, Sign } from './types.js';

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(message: string, readonly status?: number) {
    super(message);
  }
}

export interface PollOptions {
  intervalMs?: number;
  timeoutMs?: number;
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = '',
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.baseUrl + path, init);
    } catch (err) {
      throw new ApiError(`network failure: ${(err as Error).message}`);
    }
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = (await response.json()) as { detail?: string };
        if (body.detail) detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(detail, response.status);
    }
    return (await response.json()) as T;
  }

  getSigns(): Promise<Sign[]> {
    return this.json<Sign[]>('/api/signs');
  }

  getSign(id: string): Promise<Sign> {
    return this.json<Sign>(`/api/signs/${encodeURIComponent(id)}`);
  }

  async submitAttempt(target: string, file: File | Blob, filename = 'attempt.csv'): Promise<string> {
    const form = new FormData();
    form.append('target', target);
    form.append('file', file, filename);
    const body = await this.json<{ id: string }>('/api/attempts', {
      method: 'POST',
      body: form,
    });
    return body.id;
  }

  getAttempt(id: string): Promise<Attempt> {
    return this.json<Attempt>(`/api/attempts/${encodeURIComponent(id)}`);
  }

  /** Poll until the attempt leaves the processing state. */
  async pollAttempt(id: string, options: PollOptions = {}): Promise<Attempt> {
    const interval = options.intervalMs ?? 250;
    const deadline = Date.now() + (options.timeoutMs ?? 30_000);
    for (;;) {
      const attempt = await this.getAttempt(id);
      if (attempt.status !== 'processing') return attempt;
      if (Date.now() >= deadline) {
        throw new ApiError(`attempt ${id} still processing after timeout`);
      }
      await new Promise((resolve) => setTimeout(resolve, interval));
    }
  }
}
