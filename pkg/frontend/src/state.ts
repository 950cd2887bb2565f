/** UI session: which household is active and what is on screen. */

import type { PlanResponse, WhatIfResponse } from './types.js';

export interface UiSession {
  apiBaseUrl: string;
  householdId: string | null;
  activePlan: PlanResponse | null;
  pendingWhatIf: WhatIfResponse | null;
}

export function newSession(apiBaseUrl = ''): UiSession {
  return {
    apiBaseUrl,
    householdId: null,
    activePlan: null,
    pendingWhatIf: null,
  };
}
