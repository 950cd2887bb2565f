/**
 * Substitution review: accept keeps the active plan; reject pins the proposed
 * substitute out of the candidate set (household `excluded_items`) and asks
 * the API to re-plan. If the re-plan is infeasible the exclusion is rolled
 * back so the household keeps a workable plan.
 */

import { ApiClient, ApiRequestError } from './api.js';
import type { HouseholdForm, PlanResponse } from './types.js';

export interface ReviewOutcome {
  decision: 'accept' | 'reject';
  plan: PlanResponse | null;
  rolledBack: boolean;
  diagnosisKind: string | null;
}

export async function reviewSubstitution(
  api: ApiClient,
  householdId: string,
  substituteItem: string,
  decision: 'accept' | 'reject',
  asOf = 0,
): Promise<ReviewOutcome> {
  if (decision === 'accept') {
    // plan confirmed as-is; no plan math happens client-side
    return { decision, plan: null, rolledBack: false, diagnosisKind: null };
  }
  const profile = await api.getHousehold(householdId);
  const updated: HouseholdForm = {
    schema: 1,
    members: profile.members,
    monthly_income: profile.monthly_income,
    fixed_expenses: profile.fixed_expenses,
    dietary_rules: profile.dietary_rules,
    food_share: profile.food_share,
    excluded_items: [...new Set([...profile.excluded_items, substituteItem])],
    household_id: householdId,
  };
  await api.createHousehold(updated);
  try {
    const plan = await api.plan(householdId, asOf);
    return { decision, plan, rolledBack: false, diagnosisKind: null };
  } catch (err) {
    if (err instanceof ApiRequestError && err.status === 409) {
      // roll the exclusion back and surface the diagnosis
      await api.createHousehold({
        ...updated,
        excluded_items: profile.excluded_items,
      });
      const detail = err.detail as { diagnosis?: { kind?: string } } | null;
      return {
        decision,
        plan: null,
        rolledBack: true,
        diagnosisKind: detail?.diagnosis?.kind ?? 'unknown',
      };
    }
    throw err;
  }
}
