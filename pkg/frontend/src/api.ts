// Thin client over the /api/v1 JSON contract.  All model numbers come from
// the server; the client never recomputes anything.

import type {
  EquilibriumResult,
  JobRecord,
  RunConfig,
  SimulateResult,
  SweepResult,
} from './types.js';

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string = '',
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
      throw new ApiError(response.status, (body as any).error ?? response.statusText);
    }
    return body as T;
  }

  submitSimulate(config: RunConfig): Promise<JobRecord> {
    return this.request('/api/v1/simulate', {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(config),
    });
  }

  submitSweep(config: RunConfig): Promise<JobRecord> {
    return this.request('/api/v1/sweep', {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(config),
    });
  }

  jobStatus(id: string): Promise<JobRecord> {
    return this.request(`/api/v1/jobs/${id}`);
  }

  cancelJob(id: string): Promise<JobRecord> {
    return this.request(`/api/v1/jobs/${id}`, { method: 'DELETE' });
  }

  simulateResult(id: string, stride?: number): Promise<SimulateResult> {
    const query = stride ? `?stride=${stride}` : '';
    return this.request(`/api/v1/jobs/${id}/result${query}`);
  }

  sweepResult(id: string): Promise<SweepResult> {
    return this.request(`/api/v1/jobs/${id}/result`);
  }

  equilibrium(config: RunConfig): Promise<EquilibriumResult> {
    const encoded = encodeURIComponent(JSON.stringify(config));
    return this.request(`/api/v1/equilibrium?config=${encoded}`);
  }

  // Poll until the job leaves the queue; interval backs off geometrically
  // so long sweeps do not hammer the server.
  async waitForJob(
    id: string,
    onProgress?: (record: JobRecord) => void,
    baseIntervalMs = 500,
    maxIntervalMs = 5000,
    sleep: (ms: number) => Promise<void> = (ms) => new Promise((r) => setTimeout(r, ms)),
  ): Promise<JobRecord> {
    let interval = baseIntervalMs;
    for (;;) {
      const record = await this.jobStatus(id);
      onProgress?.(record);
      if (record.status === 'done' || record.status === 'failed') {
        return record;
      }
      await sleep(interval);
      interval = Math.min(interval * 1.5, maxIntervalMs);
    }
  }
}
