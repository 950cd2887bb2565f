/**
 * What-if explorer: slide a relative price change on one item and render the
 * hypothetical re-plan the API returns. Results are never persisted (the
 * service guarantees it; tests verify history length is unchanged).
 *
 * Concurrent slider moves deduplicate latest-wins: stale responses are
 * dropped by sequence number.
 */

import { ApiClient } from './api.js';
import { escapeHtml, money, pct, signedMoney } from './format.js';
import type { WhatIfResponse } from './types.js';

export interface WhatIfView {
  triggered: boolean;
  infeasible: boolean;
  /** exactly the API's cost_delta field */
  costDelta: number | null;
  newCost: number | null;
  oldCostRevalued: number | null;
  adequacyDelta: number | null;
  substitutions: [string, string, string][];
  diagnosisKind: string | null;
}

export function toView(resp: WhatIfResponse): WhatIfView {
  return {
    triggered: resp.triggered,
    infeasible: Boolean(resp.infeasible),
    costDelta: resp.cost_delta ?? null,
    newCost: resp.new_cost ?? null,
    oldCostRevalued: resp.old_cost_revalued ?? null,
    adequacyDelta: resp.adequacy_delta ?? null,
    substitutions: resp.substitutions ?? [],
    diagnosisKind: resp.diagnosis?.kind ?? null,
  };
}

export class WhatIfController {
  private sequence = 0;
  latest: WhatIfView | null = null;

  constructor(
    private api: ApiClient,
    private householdId: string,
    private onRender: (html: string, view: WhatIfView) => void = () => {},
  ) {}

  /** Fire a what-if; stale responses (older sequence) are discarded. */
  async explore(itemId: string, relChange: number): Promise<WhatIfView | null> {
    const ticket = ++this.sequence;
    const resp = await this.api.whatIf(this.householdId, itemId, relChange);
    if (ticket !== this.sequence) {
      return null; // a newer slider position already answered
    }
    const view = toView(resp);
    this.latest = view;
    this.onRender(renderWhatIf(itemId, relChange, view), view);
    return view;
  }
}

export function renderWhatIf(itemId: string, relChange: number, view: WhatIfView): string {
  const head =
    `<h3>What if ${escapeHtml(itemId)} moves ${pct(relChange * 100)}?</h3>` +
    '<p class="not-persisted">Hypothetical only - not saved to history.</p>';
  if (!view.triggered) {
    return head + '<p class="empty-diff">Within the shock threshold: plan unchanged.</p>';
  }
  if (view.infeasible) {
    return (
      head +
      `<div class="diagnosis">No feasible plan: <strong>${escapeHtml(
        view.diagnosisKind ?? 'unknown',
      )}</strong></div>`
    );
  }
  const subs = view.substitutions
    .map(
      ([from, to, why]) =>
        `<li>${escapeHtml(from)} → ${escapeHtml(to)} <em>(${escapeHtml(why)})</em></li>`,
    )
    .join('');
  return [
    head,
    `<p class="cost-delta" data-value="${view.costDelta}">Cost delta: ` +
      `<strong>${signedMoney(view.costDelta!)}</strong></p>`,
    `<p>Keeping the old menu would cost ${money(view.oldCostRevalued!)}; ` +
      `re-planned cost is ${money(view.newCost!)}.</p>`,
    `<p>Adequacy delta: ${view.adequacyDelta!.toFixed(3)} points.</p>`,
    subs ? `<ul class="substitutions">${subs}</ul>` : '<p>No substitutions needed.</p>',
  ].join('');
}
