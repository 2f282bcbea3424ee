// Wire types for the gateway API. These mirror the server's JSON exactly;
// the dashboard holds no state of its own beyond what these carry.

export type RecipientClass = 'clinician' | 'researcher' | 'insurer' | 'self';
export type ContextTag = 'routine' | 'research' | 'emergency';
export type Effect = 'allow' | 'deny' | 'ask_user';
export type RequestState = 'pending' | 'allowed' | 'denied' | 'expired';

export interface TransferRequest {
  request_id: string;
  requester: string;
  requester_class: RecipientClass;
  user_id: string;
  categories: string[];
  context: ContextTag;
  state: RequestState;
  created_ms: number;
  decided_ms: number | null;
  decided_by: 'policy' | 'user' | null;
}

export interface ContextRule {
  priority: number;
  effect: Effect;
  recipient_class?: RecipientClass | null;
  category?: string | null;
  context?: ContextTag | null;
}

export interface PolicyDocument {
  schema_version: number;
  user_id: string;
  version: number;
  rules: Record<string, Partial<Record<RecipientClass, Effect>>>;
  context_rules: ContextRule[];
}

export interface LedgerEntry {
  index: number;
  hash: string;
  event: {
    kind: string;
    user_id: string;
    actor: string;
    timestamp_ms: number;
    request_id: string;
    categories: string[];
    decision: string;
    decided_by: string;
    detail: Record<string, string>;
  };
}

export type PushEventKind = 'request.pending' | 'request.decided' | 'ledger.appended';

export interface PushEvent {
  kind: PushEventKind;
  data: Record<string, unknown>;
}

export const CATEGORIES = ['activity', 'cardiac', 'metabolic', 'respiratory', 'temperature'] as const;
export const RECIPIENT_CLASSES: RecipientClass[] = ['clinician', 'researcher', 'insurer', 'self'];
export const EFFECTS: Effect[] = ['allow', 'deny', 'ask_user'];
