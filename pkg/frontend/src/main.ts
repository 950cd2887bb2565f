/** Browser wiring: forms in, API out, rendered HTML back into the page. */

import { ApiClient } from './api.js';
import { renderAdequacyBars, renderCostChart } from './charts.js';
import { renderPlan } from './planView.js';
import { renderBudgetPanel, submitProfile } from './profileForm.js';
import { newSession } from './state.js';
import { reviewSubstitution } from './substitution.js';
import type { HouseholdForm, MemberForm } from './types.js';
import { WhatIfController } from './whatif.js';

const session = newSession();
const api = new ApiClient(session.apiBaseUrl);

function $(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el;
}

function readMembers(): MemberForm[] {
  const rows = document.querySelectorAll<HTMLElement>('#members .member-row');
  return Array.from(rows).map((row) => ({
    age: Number((row.querySelector('.age') as HTMLInputElement).value),
    sex: (row.querySelector('.sex') as HTMLSelectElement).value as MemberForm['sex'],
    activity_level: (row.querySelector('.activity') as HTMLSelectElement)
      .value as MemberForm['activity_level'],
    conditions: Array.from(
      row.querySelectorAll<HTMLInputElement>('.condition:checked'),
    ).map((c) => c.value),
  }));
}

function readForm(): HouseholdForm {
  return {
    schema: 1,
    members: readMembers(),
    monthly_income: Number(($('income') as HTMLInputElement).value),
    fixed_expenses: Number(($('expenses') as HTMLInputElement).value),
    dietary_rules: Array.from(
      document.querySelectorAll<HTMLInputElement>('.rule:checked'),
    ).map((r) => r.value),
    food_share: Number(($('food-share') as HTMLInputElement).value),
    excluded_items: [],
    household_id: session.householdId ?? undefined,
  };
}

async function refreshPlanAndCharts(): Promise<void> {
  if (!session.householdId) return;
  const plan = await api.plan(session.householdId);
  session.activePlan = plan;
  $('plan').innerHTML = renderPlan(plan);
  const history = await api.history(session.householdId);
  $('cost-chart').innerHTML = renderCostChart(history.records);
  const latest = history.records[history.records.length - 1];
  if (latest) {
    $('adequacy').innerHTML = renderAdequacyBars(latest);
  }
}

export function wireUp(): void {
  $('profile-form').addEventListener('submit', async (ev) => {
    ev.preventDefault();
    const result = await submitProfile(api, readForm());
    $('budget-panel').innerHTML = renderBudgetPanel(result);
    if (result.ok) {
      session.householdId = result.householdId!;
      await refreshPlanAndCharts();
    }
  });

  const whatIfOutput = $('whatif-output');
  let controller: WhatIfController | null = null;
  const slider = $('whatif-slider') as HTMLInputElement;
  const itemInput = $('whatif-item') as HTMLInputElement;
  slider.addEventListener('change', async () => {
    if (!session.householdId) return;
    if (!controller) {
      controller = new WhatIfController(api, session.householdId, (html) => {
        whatIfOutput.innerHTML = html;
      });
    }
    await controller.explore(itemInput.value, Number(slider.value) / 100);
  });

  $('plan').addEventListener('click', async (ev) => {
    const button = ev.target as HTMLElement;
    const action = button.dataset?.action;
    if (!action || !session.householdId) return;
    const item = (button.closest('.substitution') as HTMLElement)?.dataset?.to;
    if (!item) return;
    const outcome = await reviewSubstitution(
      api,
      session.householdId,
      item,
      action as 'accept' | 'reject',
    );
    if (outcome.rolledBack) {
      $('budget-panel').insertAdjacentHTML(
        'beforeend',
        `<p class="diagnosis">Cannot exclude ${item}: ${outcome.diagnosisKind}</p>`,
      );
    } else if (outcome.plan) {
      await refreshPlanAndCharts();
    }
  });
}

if (typeof document !== 'undefined' && document.getElementById('profile-form')) {
  wireUp();
}
