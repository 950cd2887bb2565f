/**
 * Inline SVG charts built from plan history: weekly cost line and adequacy
 * bars. Pure string rendering; every plotted value is an API response field.
 */

import type { PlanRecord } from './types.js';

const W = 480;
const H = 160;
const PAD = 28;

export interface CostPoint {
  week: number;
  cost: number;
  trigger: string;
}

export function costSeries(records: PlanRecord[]): CostPoint[] {
  return records.map((r) => ({
    week: r.week_index,
    cost: r.plan.total_cost,
    trigger: r.trigger,
  }));
}

export function renderCostChart(records: PlanRecord[]): string {
  const points = costSeries(records);
  if (points.length === 0) {
    return '<svg class="cost-chart" viewBox="0 0 480 160"><text x="10" y="20">No plans yet</text></svg>';
  }
  const costs = points.map((p) => p.cost);
  const maxCost = Math.max(...costs) * 1.1 || 1;
  const step = points.length > 1 ? (W - 2 * PAD) / (points.length - 1) : 0;
  const xy = points.map((p, i) => {
    const x = PAD + i * step;
    const y = H - PAD - (p.cost / maxCost) * (H - 2 * PAD);
    return { x, y, p };
  });
  const path = xy.map(({ x, y }, i) => `${i === 0 ? 'M' : 'L'}${x.toFixed(1)},${y.toFixed(1)}`).join(' ');
  const dots = xy
    .map(
      ({ x, y, p }) =>
        `<circle cx="${x.toFixed(1)}" cy="${y.toFixed(1)}" r="3" ` +
        `class="${p.trigger}" data-cost="${p.cost}"><title>week ${p.week}: ${p.cost.toFixed(2)}</title></circle>`,
    )
    .join('');
  return (
    `<svg class="cost-chart" viewBox="0 0 ${W} ${H}">` +
    `<path d="${path}" fill="none" stroke="currentColor"/>` +
    dots +
    '</svg>'
  );
}

export function renderAdequacyBars(record: PlanRecord): string {
  const entries = Object.entries(record.plan.adequacy.per_nutrient).sort();
  const barH = 14;
  const height = entries.length * (barH + 4) + 8;
  const bars = entries
    .map(([nid, ratio], i) => {
      const capped = Math.min(1, ratio);
      const y = 4 + i * (barH + 4);
      const width = capped * (W - 160);
      const cls = ratio < 1 ? 'short' : 'met';
      return (
        `<text x="4" y="${y + 11}" font-size="10">${nid}</text>` +
        `<rect x="150" y="${y}" width="${width.toFixed(1)}" height="${barH}" ` +
        `class="${cls}" data-ratio="${ratio}"/>`
      );
    })
    .join('');
  return `<svg class="adequacy-bars" viewBox="0 0 ${W} ${height}">${bars}</svg>`;
}
