/**
 * In-memory stand-in for the pantryplan service, faithful to the documented
 * endpoints: plan history only grows through POST /plan and /prices, never
 * through /whatif. Numeric fixture values mirror the real service's
 * case-study outputs (weekly budget 415 for the 10,000 SAR household).
 */

import type { FetchLike } from '../src/api.js';
import type {
  HouseholdForm,
  MealPlan,
  PlanRecord,
  PlanResponse,
  WhatIfResponse,
} from '../src/types.js';

export interface MockState {
  households: Map<string, HouseholdForm>;
  histories: Map<string, PlanRecord[]>;
  calls: { method: string; path: string; body: unknown }[];
  nextWhatIf: WhatIfResponse | null;
  planInfeasible: boolean;
}

export function newState(): MockState {
  return {
    households: new Map(),
    histories: new Map(),
    calls: [],
    nextWhatIf: null,
    planInfeasible: false,
  };
}

function budgetFor(form: HouseholdForm) {
  const raw = (form.food_share * form.monthly_income) / 4;
  const ceiling = (form.monthly_income - form.fixed_expenses) / 4;
  const amount = Math.min(raw, ceiling);
  return {
    amount,
    clamped: raw > ceiling,
    disposable_monthly: form.monthly_income - form.fixed_expenses,
    food_share: form.food_share,
    monthly_income: form.monthly_income,
  };
}

function samplePlan(): MealPlan {
  return {
    schema: 1,
    quantities: { sardines_canned: 60.2, wheat_flour: 70.1, cabbage: 30.0 },
    total_cost: 271.37,
    adequacy: {
      per_nutrient: { protein_g: 1.2, vitamin_d_iu: 1.0, iron_mg: 0.97 },
      aggregate_pct: 99.0,
      violations: ['iron_mg'],
    },
    prices_used: { sardines_canned: 2.4, wheat_flour: 0.35, cabbage: 0.35 },
    substitutions: [
      ['chicken_breast', 'lentils_dry', 'price of chicken_breast rose 20%'],
    ],
  };
}

function planResponse(householdId: string, form: HouseholdForm): PlanResponse {
  return {
    schema: 1,
    household_id: householdId,
    plan: samplePlan(),
    shopping_list: {
      lines: [
        { item_id: 'sardines_canned', packs: 61, pack_size: 1.0, line_cost: 146.4 },
        { item_id: 'wheat_flour', packs: 1, pack_size: 100.0, line_cost: 35.0 },
      ],
      total: 181.4,
    },
    explanation: {
      entries: [
        { agent: 'budget', decision: 'weekly budget 415.00', evidence: {} },
        { agent: 'nutrition', decision: 'binding floors: vitamin_d_iu', evidence: {} },
      ],
    },
    budget: budgetFor(form),
  };
}

export function mockFetch(state: MockState): FetchLike {
  let counter = 0;
  return async (input: string, init?: RequestInit) => {
    const method = init?.method ?? 'GET';
    const url = new URL(input, 'http://test');
    const path = url.pathname;
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    state.calls.push({ method, path, body });

    const json = (status: number, data: unknown) =>
      new Response(JSON.stringify(data), {
        status,
        headers: { 'content-type': 'application/json' },
      });

    if (method === 'POST' && path === '/households') {
      const form = body as HouseholdForm;
      // the real service rejects zero disposable income with a budget error
      if (form.fixed_expenses >= form.monthly_income) {
        return json(422, { detail: 'disposable income is 0.00; cannot budget for food' });
      }
      const id = form.household_id ?? `hh-${++counter}`;
      state.households.set(id, form);
      if (!state.histories.has(id)) state.histories.set(id, []);
      return json(201, {
        schema: 1,
        household_id: id,
        weekly_budget: budgetFor(form),
      });
    }

    const householdMatch = path.match(/^\/households\/([^/]+)(\/.*)?$/);
    if (householdMatch) {
      const id = householdMatch[1];
      const rest = householdMatch[2] ?? '';
      const form = state.households.get(id);
      if (!form) return json(404, { detail: `unknown household ${id}` });
      if (method === 'GET' && rest === '') {
        return json(200, { ...form, household_id: id });
      }
      if (method === 'POST' && rest === '/plan') {
        if (state.planInfeasible) {
          return json(409, {
            detail: { error: 'infeasible', diagnosis: { kind: 'budget-bound' } },
          });
        }
        const resp = planResponse(id, form);
        state.histories.get(id)!.push({
          plan: resp.plan,
          household_id: id,
          week_index: state.histories.get(id)!.length,
          trigger: state.histories.get(id)!.length === 0 ? 'initial' : 'manual',
          created_at: 0,
        });
        return json(200, resp);
      }
      if (method === 'POST' && rest === '/whatif') {
        // deliberately does NOT touch state.histories
        const resp: WhatIfResponse =
          state.nextWhatIf ?? {
            schema: 1,
            triggered: true,
            cost_delta: -12.345678,
            old_cost_revalued: 300.123456,
            new_cost: 287.777778,
            substitutions: [
              ['chicken_breast', 'sardines_canned', 'price of chicken_breast rose 20%'],
            ],
            adequacy_delta: 0.0,
            plan: samplePlan(),
          };
        return json(200, resp);
      }
      if (method === 'GET' && rest === '/history') {
        return json(200, { schema: 1, records: state.histories.get(id) });
      }
    }

    return json(404, { detail: `no route ${method} ${path}` });
  };
}

export const CASE_STUDY: HouseholdForm = {
  schema: 1,
  members: [
    { age: 35, sex: 'male', activity_level: 'moderate', conditions: [] },
    { age: 32, sex: 'female', activity_level: 'moderate', conditions: [] },
    { age: 10, sex: 'male', activity_level: 'moderate', conditions: [] },
    { age: 6, sex: 'female', activity_level: 'moderate', conditions: [] },
  ],
  monthly_income: 10000,
  fixed_expenses: 6000,
  dietary_rules: ['halal'],
  food_share: 0.166,
  excluded_items: [],
};
