// Thin typed client over the gateway's JSON API.

import type { LedgerEntry, PolicyDocument, TransferRequest } from './types.js';

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function handle<T>(res: Response): Promise<T> {
  if (res.ok) {
    return (await res.json()) as T;
  }
  let detail = res.statusText;
  try {
    const body = (await res.json()) as { detail?: string };
    if (body.detail) detail = body.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(res.status, detail);
}

export class GatewayClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private async get<T>(path: string): Promise<T> {
    return handle<T>(await this.fetchImpl(`${this.baseUrl}${path}`));
  }

  private async send<T>(method: string, path: string, body?: unknown): Promise<T> {
    return handle<T>(
      await this.fetchImpl(`${this.baseUrl}${path}`, {
        method,
        headers: { 'Content-Type': 'application/json' },
        body: body === undefined ? undefined : JSON.stringify(body),
      }),
    );
  }

  pendingRequests(userId: string): Promise<TransferRequest[]> {
    return this.get(`/requests/pending?user=${encodeURIComponent(userId)}`);
  }

  getRequest(requestId: string): Promise<TransferRequest> {
    return this.get(`/requests/${encodeURIComponent(requestId)}`);
  }

  createRequest(body: {
    requester: string;
    requester_class: string;
    user_id: string;
    categories: string[];
    context: string;
  }): Promise<TransferRequest> {
    return this.send('POST', '/requests', body);
  }

  submitDecision(requestId: string, decision: 'allow' | 'deny', actor: string): Promise<TransferRequest> {
    return this.send('POST', `/requests/${encodeURIComponent(requestId)}/decision`, {
      decision,
      actor,
    });
  }

  getPolicy(userId: string): Promise<PolicyDocument> {
    return this.get(`/policies/${encodeURIComponent(userId)}`);
  }

  putPolicy(userId: string, policy: PolicyDocument): Promise<PolicyDocument> {
    return this.send('PUT', `/policies/${encodeURIComponent(userId)}`, {
      version: policy.version,
      rules: policy.rules,
      context_rules: policy.context_rules,
    });
  }

  ledger(filter: { user?: string; kind?: string; request_id?: string } = {}): Promise<LedgerEntry[]> {
    const params = new URLSearchParams();
    if (filter.user) params.set('user', filter.user);
    if (filter.kind) params.set('kind', filter.kind);
    if (filter.request_id) params.set('request_id', filter.request_id);
    const qs = params.toString();
    return this.get(`/ledger${qs ? `?${qs}` : ''}`);
  }

  metrics(): Promise<Record<string, number>> {
    return this.get('/metrics');
  }
}
