/**
 * Profile editor: validate locally, submit through the API, and surface the
 * returned weekly budget with its formula inputs. The budget figure shown is
 * exactly `weekly_budget.amount` from the response.
 */

import { ApiClient, ApiRequestError } from './api.js';
import { escapeHtml, money } from './format.js';
import type { CreateHouseholdResponse, HouseholdForm } from './types.js';
import { validateHousehold, type FieldError } from './validate.js';

export interface ProfileSubmitResult {
  ok: boolean;
  householdId?: string;
  budget?: CreateHouseholdResponse['weekly_budget'];
  clientErrors?: FieldError[];
  apiError?: string;
}

export async function submitProfile(
  api: ApiClient,
  form: HouseholdForm,
): Promise<ProfileSubmitResult> {
  const clientErrors = validateHousehold(form);
  if (clientErrors.length > 0) {
    return { ok: false, clientErrors };
  }
  try {
    const resp = await api.createHousehold(form);
    return { ok: true, householdId: resp.household_id, budget: resp.weekly_budget };
  } catch (err) {
    if (err instanceof ApiRequestError) {
      return { ok: false, apiError: String(err.detail) };
    }
    throw err;
  }
}

export function renderBudgetPanel(result: ProfileSubmitResult): string {
  if (!result.ok) {
    const items = (result.clientErrors ?? []).map(
      (e) => `<li data-field="${escapeHtml(e.field)}">${escapeHtml(e.message)}</li>`,
    );
    if (result.apiError) {
      items.push(`<li class="api-error">${escapeHtml(result.apiError)}</li>`);
    }
    return `<ul class="form-errors">${items.join('')}</ul>`;
  }
  const b = result.budget!;
  const clampNote = b.clamped
    ? '<p class="clamped">Capped by disposable income.</p>'
    : '';
  return [
    `<div class="budget-panel" data-household="${escapeHtml(result.householdId!)}">`,
    `<p class="budget-amount">Weekly budget: <strong>${money(b.amount)}</strong></p>`,
    `<p class="budget-formula">${(b.food_share * 100).toFixed(1)}% of ` +
      `${money(b.monthly_income)} / 4 weeks</p>`,
    clampNote,
    '</div>',
  ].join('');
}
