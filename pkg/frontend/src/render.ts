// The view: a pure function of UiSessionState to an HTML string, so every
// screen the user can reach is snapshot-testable without a DOM.

import { replayVisible, verdictVisible } from './state.js';
import { headStripChartSvg, trajectoryOverlaySvg } from './replay.js';
import { Sign, UiSessionState, Verdict } from './types.js';

function esc(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

function signOption(sign: Sign, selected: boolean): string {
  return `<option value="${esc(sign.id)}"${selected ? ' selected' : ''}>${esc(sign.name)}</option>`;
}

function trainingPanel(state: UiSessionState): string {
  const selected = state.signs.find((s) => s.id === state.selectedSignId) ?? null;
  const clip = selected?.clip_url
    ? `<video class="reference-clip" src="${esc(selected.clip_url)}" controls></video>`
    : `<p class="no-clip">no reference clip for this sign</p>`;
  const hints = selected
    ? `<dl class="sign-hints"><dt>hands</dt><dd>${esc(selected.manual)}</dd>` +
      `<dt>head</dt><dd>${esc(selected.nonmanual || 'none')}</dd></dl>`
    : '<p>select a sign to practice</p>';
  return (
    `<section class="panel training"><h2>Training</h2>` +
    `<select id="sign-select">${state.signs
      .map((s) => signOption(s, s.id === state.selectedSignId))
      .join('')}</select>` +
    clip +
    hints +
    `</section>`
  );
}

function practicePanel(state: UiSessionState): string {
  const busy = state.phase === 'uploading' || state.phase === 'processing';
  const label =
    state.phase === 'uploading'
      ? 'uploading attempt...'
      : state.phase === 'processing'
        ? 'analyzing attempt...'
        : 'try this sign';
  return (
    `<section class="panel practice"><h2>Practice</h2>` +
    `<input type="file" id="attempt-file"${busy ? ' disabled' : ''}/>` +
    `<button id="try-button"${busy ? ' disabled' : ''}>${label}</button>` +
    `</section>`
  );
}

export function verdictBanner(verdict: Verdict): string {
  const cls = { ok: 'ok', false: 'false', head_ok_hands_false: 'partial' }[verdict.kind];
  return (
    `<div class="verdict verdict-${cls}">` +
    `<strong>${esc(verdict.text)}</strong>` +
    `<p class="explanation">${esc(verdict.explanation)}</p>` +
    `</div>`
  );
}

function informationPanel(state: UiSessionState): string {
  const verdict = verdictVisible(state);
  const error = state.error
    ? `<div class="error">error: ${esc(state.error)} <button id="retry-button">retry</button></div>`
    : '';
  const body = verdict ? verdictBanner(verdict) : '<p class="pending">no result yet</p>';
  return `<section class="panel information"><h2>Information</h2>${error}${body}</section>`;
}

function replayPanel(state: UiSessionState): string {
  const replay = replayVisible(state);
  const body = replay
    ? trajectoryOverlaySvg(replay) + headStripChartSvg(replay)
    : '<p class="pending">submit an attempt to see your trajectories</p>';
  return `<section class="panel replay"><h2>Replay</h2>${body}</section>`;
}

export function render(state: UiSessionState): string {
  return (
    `<main class="signtutor">` +
    trainingPanel(state) +
    practicePanel(state) +
    informationPanel(state) +
    replayPanel(state) +
    `</main>`
  );
}
