// Replay rendering: pure functions from replay payloads to SVG strings.
// The trajectory overlay draws both normalized hand paths; the strip chart
// draws the three head channels over time.

import { ReplayData } from './types.js';

const W = 320;
const H = 240;

function pathFrom(points: [number, number][], toX: (x: number) => number, toY: (y: number) => number): string {
  if (points.length === 0) return '';
  const cmds = points.map(([x, y], i) => `${i === 0 ? 'M' : 'L'}${toX(x).toFixed(1)},${toY(y).toFixed(1)}`);
  return cmds.join(' ');
}

function bounds(values: number[]): [number, number] {
  if (values.length === 0) return [0, 1];
  let lo = Math.min(...values);
  let hi = Math.max(...values);
  if (hi === lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  return [lo, hi];
}

export function trajectoryOverlaySvg(replay: ReplayData): string {
  const xs = [...replay.left, ...replay.right].map((p) => p[0]);
  const ys = [...replay.left, ...replay.right].map((p) => p[1]);
  const [x0, x1] = bounds(xs);
  const [y0, y1] = bounds(ys);
  const pad = 12;
  const toX = (x: number) => pad + ((x - x0) / (x1 - x0)) * (W - 2 * pad);
  const toY = (y: number) => pad + ((y - y0) / (y1 - y0)) * (H - 2 * pad);
  const left = pathFrom(replay.left, toX, toY);
  const right = pathFrom(replay.right, toX, toY);
  return (
    `<svg class="overlay" viewBox="0 0 ${W} ${H}" xmlns="http://www.w3.org/2000/svg">` +
    `<path class="hand-left" d="${left}" fill="none" stroke="#2a9d2a" stroke-width="2"/>` +
    `<path class="hand-right" d="${right}" fill="none" stroke="#2a4da9" stroke-width="2"/>` +
    `</svg>`
  );
}

export function headStripChartSvg(replay: ReplayData): string {
  const channels: [string, number[], string][] = [
    ['energy', replay.head.energy, '#888888'],
    ['vx', replay.head.vx, '#c2571a'],
    ['vy', replay.head.vy, '#7a1ac2'],
  ];
  const laneH = H / channels.length;
  const pad = 6;
  let body = '';
  channels.forEach(([name, series, color], lane) => {
    const [lo, hi] = bounds(series);
    const toX = (i: number) => (series.length > 1 ? (i / (series.length - 1)) * W : 0);
    const toY = (v: number) =>
      lane * laneH + pad + (1 - (v - lo) / (hi - lo)) * (laneH - 2 * pad);
    const d = pathFrom(series.map((v, i) => [i, v] as [number, number]),
      (i) => toX(i), (v) => toY(v));
    body +=
      `<path class="head-${name}" d="${d}" fill="none" stroke="${color}" stroke-width="1.5"/>` +
      `<text x="4" y="${lane * laneH + 12}" font-size="10" fill="${color}">${name}</text>`;
  });
  return `<svg class="stripchart" viewBox="0 0 ${W} ${H}" xmlns="http://www.w3.org/2000/svg">${body}</svg>`;
}
