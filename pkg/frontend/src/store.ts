// Dashboard state. Everything here derives from the gateway API: a hard
// refresh (full resync) reproduces the identical view, pending and
// history never overlap, and a decision is only trusted once the server
// confirmed it (optimistic removal is rolled back on failure).

import { ApiError, GatewayClient } from './api.js';
import type { SseMessage } from './sse.js';
import type {
  ContextRule,
  Effect,
  LedgerEntry,
  PolicyDocument,
  RecipientClass,
  TransferRequest,
} from './types.js';

export const DEFAULT_TTL_MS = 24 * 60 * 60 * 1000;

export interface PolicyEditorState {
  serverVersion: number;
  rules: Record<string, Partial<Record<RecipientClass, Effect>>>;
  contextRules: ContextRule[];
  dirty: boolean;
  conflict: PolicyDocument | null; // server copy to merge when a save was rejected
}

export interface DashboardState {
  userId: string;
  pending: TransferRequest[];
  history: TransferRequest[];
  auditTrail: LedgerEntry[];
  offline: boolean;
  notices: string[];
  editor: PolicyEditorState | null;
}

type Listener = (state: DashboardState) => void;

export function countdownMs(request: TransferRequest, nowMs: number, ttlMs = DEFAULT_TTL_MS): number {
  return Math.max(0, request.created_ms + ttlMs - nowMs);
}

export class DashboardStore {
  private state: DashboardState;
  private listeners: Listener[] = [];

  constructor(
    private readonly client: GatewayClient,
    userId: string,
    private readonly ttlMs: number = DEFAULT_TTL_MS,
  ) {
    this.state = {
      userId,
      pending: [],
      history: [],
      auditTrail: [],
      offline: false,
      notices: [],
      editor: null,
    };
  }

  snapshot(): DashboardState {
    return this.state;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private update(patch: Partial<DashboardState>): void {
    this.state = { ...this.state, ...patch };
    this.assertDisjoint();
    for (const listener of this.listeners) listener(this.state);
  }

  private assertDisjoint(): void {
    const pendingIds = new Set(this.state.pending.map((r) => r.request_id));
    for (const item of this.state.history) {
      if (pendingIds.has(item.request_id)) {
        throw new Error(`request ${item.request_id} is in both pending and history`);
      }
    }
  }

  // ---- sync: the server is the source of truth --------------------------

  async resync(): Promise<void> {
    const [pending, history, audit] = await Promise.all([
      this.client.pendingRequests(this.state.userId),
      this.loadHistory(),
      this.client.ledger({ user: this.state.userId }),
    ]);
    this.update({ pending, history, auditTrail: audit, offline: false });
  }

  private async loadHistory(): Promise<TransferRequest[]> {
    const decided = await this.client.ledger({ user: this.state.userId, kind: 'Decided' });
    const ids = [...new Set(decided.map((e) => e.event.request_id))];
    const requests = await Promise.all(ids.map((id) => this.client.getRequest(id)));
    return requests
      .filter((r) => r.state !== 'pending')
      .sort((a, b) => (b.decided_ms ?? 0) - (a.decided_ms ?? 0));
  }

  // ---- live events -------------------------------------------------------

  handleSse(msg: SseMessage): void {
    if (msg.event === 'request.pending') {
      const request = JSON.parse(msg.data) as TransferRequest;
      if (request.user_id !== this.state.userId) return;
      const rest = this.state.pending.filter((r) => r.request_id !== request.request_id);
      this.update({
        pending: [...rest, request].sort((a, b) => a.created_ms - b.created_ms),
        notices: [...this.state.notices, `New transfer request from ${request.requester}`],
      });
    } else if (msg.event === 'request.decided') {
      const request = JSON.parse(msg.data) as TransferRequest;
      if (request.user_id !== this.state.userId) return;
      this.placeDecided(request);
    }
  }

  markOffline(): void {
    if (!this.state.offline) this.update({ offline: true });
  }

  async markOnline(): Promise<void> {
    // a gap may have dropped events: full resync, duplicates impossible
    // because the lists are replaced wholesale
    await this.resync();
  }

  // ---- decisions ----------------------------------------------------------

  async decide(requestId: string, decision: 'allow' | 'deny'): Promise<void> {
    const current = this.state.pending.find((r) => r.request_id === requestId);
    if (!current) return;
    // optimistic removal; rolled back if the gateway refuses
    this.update({ pending: this.state.pending.filter((r) => r.request_id !== requestId) });
    try {
      const decided = await this.client.submitDecision(requestId, decision, this.state.userId);
      this.placeDecided(decided);
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        // already settled or expired: adopt the server's truth
        const truth = await this.client.getRequest(requestId);
        if (truth.state === 'expired') {
          // expiry is not a decision; it only leaves a notice (history is
          // derived from Decided ledger events, so a refresh agrees)
          this.update({
            pending: this.state.pending.filter((r) => r.request_id !== requestId),
            notices: [...this.state.notices, `Request from ${truth.requester} expired before you decided`],
          });
        } else {
          this.placeDecided(truth);
        }
        return;
      }
      this.update({ pending: [...this.state.pending, current].sort((a, b) => a.created_ms - b.created_ms) });
      throw error;
    }
  }

  private placeDecided(request: TransferRequest): void {
    const pending = this.state.pending.filter((r) => r.request_id !== request.request_id);
    const history = [
      request,
      ...this.state.history.filter((r) => r.request_id !== request.request_id),
    ].sort((a, b) => (b.decided_ms ?? b.created_ms) - (a.decided_ms ?? a.created_ms));
    this.update({ pending, history });
  }

  countdown(request: TransferRequest, nowMs: number): number {
    return countdownMs(request, nowMs, this.ttlMs);
  }

  // ---- policy editor --------------------------------------------------------

  async loadPolicy(): Promise<void> {
    const policy = await this.client.getPolicy(this.state.userId);
    this.update({ editor: editorFromPolicy(policy) });
  }

  setRule(category: string, recipientClass: RecipientClass, effect: Effect): void {
    const editor = this.requireEditor();
    const rules = { ...editor.rules, [category]: { ...editor.rules[category], [recipientClass]: effect } };
    this.update({ editor: { ...editor, rules, dirty: true } });
  }

  setContextRules(contextRules: ContextRule[]): void {
    const editor = this.requireEditor();
    this.update({ editor: { ...editor, contextRules, dirty: true } });
  }

  async savePolicy(): Promise<'saved' | 'noop' | 'conflict'> {
    const editor = this.requireEditor();
    if (!editor.dirty) return 'noop'; // nothing changed: no request, version unchanged
    try {
      const saved = await this.client.putPolicy(this.state.userId, {
        schema_version: 1,
        user_id: this.state.userId,
        version: editor.serverVersion,
        rules: editor.rules,
        context_rules: editor.contextRules,
      });
      this.update({ editor: editorFromPolicy(saved) });
      return 'saved';
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        // stale editor: surface the server copy for a merge, never overwrite
        const server = await this.client.getPolicy(this.state.userId);
        this.update({ editor: { ...editor, conflict: server } });
        return 'conflict';
      }
      throw error;
    }
  }

  adoptServerPolicy(): void {
    const editor = this.requireEditor();
    if (!editor.conflict) return;
    this.update({ editor: editorFromPolicy(editor.conflict) });
  }

  private requireEditor(): PolicyEditorState {
    if (!this.state.editor) throw new Error('policy editor not loaded');
    return this.state.editor;
  }
}

function editorFromPolicy(policy: PolicyDocument): PolicyEditorState {
  return {
    serverVersion: policy.version,
    rules: structuredClone(policy.rules),
    contextRules: structuredClone(policy.context_rules),
    dirty: false,
    conflict: null,
  };
}
