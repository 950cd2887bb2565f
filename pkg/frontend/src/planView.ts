/** Render the active plan: items, shopping list, explanation entries. */

import { escapeHtml, money, pct } from './format.js';
import type { PlanResponse } from './types.js';

export function renderPlan(resp: PlanResponse): string {
  const plan = resp.plan;
  const rows = Object.entries(plan.quantities)
    .sort((a, b) => b[1] * plan.prices_used[b[0]] - a[1] * plan.prices_used[a[0]])
    .map(([iid, qty]) => {
      const cost = qty * plan.prices_used[iid];
      return (
        `<tr><td>${escapeHtml(iid)}</td><td>${(qty / 10).toFixed(2)} kg</td>` +
        `<td data-cost="${cost}">${money(cost)}</td></tr>`
      );
    })
    .join('');
  const subs = plan.substitutions
    .map(
      ([from, to, why]) =>
        `<li class="substitution" data-from="${escapeHtml(from)}" data-to="${escapeHtml(to)}">` +
        `${escapeHtml(from)} → ${escapeHtml(to)} <em>(${escapeHtml(why)})</em> ` +
        `<button data-action="accept">Accept</button> ` +
        `<button data-action="reject">Reject</button></li>`,
    )
    .join('');
  const explanation = resp.explanation.entries
    .map(
      (e) =>
        `<li><strong>${escapeHtml(e.agent)}</strong>: ${escapeHtml(e.decision)}</li>`,
    )
    .join('');
  const shopping = resp.shopping_list.lines
    .map(
      (l) =>
        `<tr><td>${escapeHtml(l.item_id)}</td><td>${l.packs} x ${l.pack_size / 10} kg</td>` +
        `<td>${money(l.line_cost)}</td></tr>`,
    )
    .join('');
  return [
    `<section class="plan" data-total="${plan.total_cost}">`,
    `<p>Week cost <strong>${money(plan.total_cost)}</strong> of ` +
      `${money(resp.budget.amount)} budget; adequacy ${pct(plan.adequacy.aggregate_pct)}.</p>`,
    `<table class="plan-items">${rows}</table>`,
    subs ? `<ul class="substitutions">${subs}</ul>` : '',
    `<h4>Shopping list (${money(resp.shopping_list.total)})</h4>`,
    `<table class="shopping">${shopping}</table>`,
    `<h4>Why</h4><ul class="explanation">${explanation}</ul>`,
    '</section>',
  ].join('');
}
