// Browser controller: wires DOM events to the pure state transitions and
// the API client.  One attempt in flight at a time; everything visual goes
// through render().

import { ApiClient } from './api.js';
import { render } from './render.js';
import {
  attemptFailed,
  attemptFinished,
  selectSign,
  startUpload,
  uploadAccepted,
  withSigns,
} from './state.js';
import { UiSessionState, initialState } from './types.js';

export class App {
  private state: UiSessionState = initialState;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient = new ApiClient(),
  ) {}

  async start(): Promise<void> {
    try {
      const signs = await this.api.getSigns();
      this.state = withSigns(this.state, signs);
      if (signs.length > 0) this.state = selectSign(this.state, signs[0].id);
    } catch (err) {
      this.state = attemptFailed(this.state, (err as Error).message);
    }
    this.paint();
  }

  private paint(): void {
    this.root.innerHTML = render(this.state);
    const select = this.root.querySelector<HTMLSelectElement>('#sign-select');
    select?.addEventListener('change', () => {
      this.state = selectSign(this.state, select.value);
      this.paint();
    });
    const tryButton = this.root.querySelector<HTMLButtonElement>('#try-button');
    tryButton?.addEventListener('click', () => void this.submit());
    const retry = this.root.querySelector<HTMLButtonElement>('#retry-button');
    retry?.addEventListener('click', () => void this.submit());
  }

  private async submit(): Promise<void> {
    const input = this.root.querySelector<HTMLInputElement>('#attempt-file');
    const file = input?.files?.[0];
    if (!file) {
      this.state = attemptFailed(this.state, 'choose an attempt file first');
      this.paint();
      return;
    }
    this.state = startUpload(this.state);
    this.paint();
    if (this.state.phase !== 'uploading') return;
    try {
      const id = await this.api.submitAttempt(this.state.selectedSignId!, file, file.name);
      this.state = uploadAccepted(this.state, id);
      this.paint();
      const attempt = await this.api.pollAttempt(id);
      this.state = attemptFinished(this.state, attempt);
    } catch (err) {
      this.state = attemptFailed(this.state, (err as Error).message);
    }
    this.paint();
  }
}

export function mount(rootId = 'app'): App {
  const root = document.getElementById(rootId);
  if (!root) throw new Error(`no #${rootId} element to mount on`);
  const app = new App(root);
  void app.start();
  return app;
}
