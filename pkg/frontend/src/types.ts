/**
 * API contract types, mirroring the pantryplan HTTP service (schema 1).
 * The UI never computes plan math itself; every displayed number comes from
 * one of these response fields.
 */

export type Sex = 'male' | 'female';
export type ActivityLevel = 'sedentary' | 'moderate' | 'active';

export const DIETARY_RULES = [
  'halal',
  'vegetarian',
  'low-sodium-suitable',
  'gluten-free',
  'nut-free',
] as const;

export const CONDITIONS = [
  'vitamin-d-deficiency',
  'anemia',
  'hypertension',
  'diabetes',
] as const;

export interface MemberForm {
  age: number;
  sex: Sex;
  activity_level: ActivityLevel;
  conditions: string[];
}

export interface HouseholdForm {
  schema: 1;
  members: MemberForm[];
  monthly_income: number;
  fixed_expenses: number;
  dietary_rules: string[];
  food_share: number;
  excluded_items: string[];
  household_id?: string;
}

export interface WeeklyBudget {
  amount: number;
  clamped: boolean;
  disposable_monthly: number;
  food_share: number;
  monthly_income: number;
}

export interface CreateHouseholdResponse {
  schema: number;
  household_id: string;
  weekly_budget: WeeklyBudget;
}

export interface AdequacyReport {
  per_nutrient: Record<string, number>;
  aggregate_pct: number;
  violations: string[];
}

export interface MealPlan {
  schema: number;
  quantities: Record<string, number>;
  total_cost: number;
  adequacy: AdequacyReport;
  prices_used: Record<string, number>;
  substitutions: [string, string, string][];
}

export interface ShoppingLine {
  item_id: string;
  packs: number;
  pack_size: number;
  line_cost: number;
}

export interface ShoppingList {
  lines: ShoppingLine[];
  total: number;
}

export interface ExplanationEntry {
  agent: string;
  decision: string;
  evidence: Record<string, unknown>;
}

export interface PlanResponse {
  schema: number;
  household_id: string;
  plan: MealPlan;
  shopping_list: ShoppingList;
  explanation: { entries: ExplanationEntry[] };
  budget: WeeklyBudget;
}

export interface WhatIfResponse {
  schema: number;
  triggered: boolean;
  infeasible?: boolean;
  diagnosis?: { kind: string; min_budget: number | null; unsatisfiable: string[] };
  cost_delta?: number;
  old_cost_revalued?: number;
  new_cost?: number;
  substitutions?: [string, string, string][];
  adequacy_delta?: number;
  plan?: MealPlan | null;
}

export interface PlanRecord {
  plan: MealPlan;
  household_id: string;
  week_index: number;
  trigger: 'initial' | 'shock-replan' | 'manual';
  created_at: number;
}

export interface HistoryResponse {
  schema: number;
  records: PlanRecord[];
}

export interface ApiError {
  status: number;
  detail: unknown;
}
