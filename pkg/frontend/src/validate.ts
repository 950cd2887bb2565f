/**
 * Client-side validation mirroring the household.json schema (schema 1).
 * Invalid forms never reach the API; the messages name the offending field.
 */

import { CONDITIONS, DIETARY_RULES, type HouseholdForm, type MemberForm } from './types.js';

export interface FieldError {
  field: string;
  message: string;
}

const SEXES = ['male', 'female'];
const ACTIVITY = ['sedentary', 'moderate', 'active'];

export function validateMember(member: MemberForm, index: number): FieldError[] {
  const errors: FieldError[] = [];
  const prefix = `members[${index}]`;
  if (!Number.isFinite(member.age) || member.age < 0) {
    errors.push({ field: `${prefix}.age`, message: 'age must be a number >= 0' });
  }
  if (!SEXES.includes(member.sex)) {
    errors.push({ field: `${prefix}.sex`, message: 'sex must be male or female' });
  }
  if (!ACTIVITY.includes(member.activity_level)) {
    errors.push({
      field: `${prefix}.activity_level`,
      message: 'activity must be sedentary, moderate, or active',
    });
  }
  for (const code of member.conditions) {
    if (!(CONDITIONS as readonly string[]).includes(code)) {
      errors.push({ field: `${prefix}.conditions`, message: `unknown condition ${code}` });
    }
  }
  return errors;
}

export function validateHousehold(form: HouseholdForm): FieldError[] {
  const errors: FieldError[] = [];
  if (form.members.length < 1) {
    errors.push({ field: 'members', message: 'at least one member is required' });
  }
  form.members.forEach((m, i) => errors.push(...validateMember(m, i)));
  if (!Number.isFinite(form.monthly_income) || form.monthly_income <= 0) {
    errors.push({ field: 'monthly_income', message: 'monthly income must be > 0' });
  }
  if (!Number.isFinite(form.fixed_expenses) || form.fixed_expenses < 0) {
    errors.push({ field: 'fixed_expenses', message: 'fixed expenses must be >= 0' });
  }
  if (form.fixed_expenses > form.monthly_income) {
    errors.push({
      field: 'fixed_expenses',
      message: 'fixed expenses cannot exceed monthly income',
    });
  }
  if (!(form.food_share > 0 && form.food_share < 1)) {
    errors.push({ field: 'food_share', message: 'food share must be between 0 and 1' });
  }
  for (const rule of form.dietary_rules) {
    if (!(DIETARY_RULES as readonly string[]).includes(rule)) {
      errors.push({ field: 'dietary_rules', message: `unknown rule ${rule}` });
    }
  }
  return errors;
}
