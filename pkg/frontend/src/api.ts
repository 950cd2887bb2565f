/** Thin fetch wrapper for the pantryplan API; fetch is injectable for tests. */

import type {
  CreateHouseholdResponse,
  HistoryResponse,
  HouseholdForm,
  PlanResponse,
  WhatIfResponse,
} from './types.js';

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiRequestError extends Error {
  constructor(public status: number, public detail: unknown) {
    super(`API error ${status}`);
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string = '',
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const resp = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? undefined : { 'content-type': 'application/json' },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await resp.text();
    const data = text ? JSON.parse(text) : null;
    if (!resp.ok) {
      throw new ApiRequestError(resp.status, data?.detail ?? data);
    }
    return data as T;
  }

  createHousehold(form: HouseholdForm): Promise<CreateHouseholdResponse> {
    return this.request('POST', '/households', form);
  }

  getHousehold(id: string): Promise<HouseholdForm & { household_id: string }> {
    return this.request('GET', `/households/${id}`);
  }

  plan(id: string, asOf = 0): Promise<PlanResponse> {
    return this.request('POST', `/households/${id}/plan?as_of=${asOf}`);
  }

  whatIf(id: string, itemId: string, relChange: number): Promise<WhatIfResponse> {
    return this.request('POST', `/households/${id}/whatif`, {
      item_id: itemId,
      rel_change: relChange,
    });
  }

  history(id: string): Promise<HistoryResponse> {
    return this.request('GET', `/households/${id}/history`);
  }
}
