// HTML rendering as pure string builders: testable without a DOM and
// applied by main.ts via innerHTML plus event delegation.

import type { DashboardState, PolicyEditorState } from './store.js';
import { countdownMs } from './store.js';
import type { LedgerEntry, TransferRequest } from './types.js';
import { CATEGORIES, EFFECTS, RECIPIENT_CLASSES } from './types.js';

export function escapeHtml(text: string): string {
  return text
    .replaceAll('&', '&amp;')
    .replaceAll('<', '&lt;')
    .replaceAll('>', '&gt;')
    .replaceAll('"', '&quot;')
    .replaceAll("'", '&#39;');
}

export function formatCountdown(ms: number): string {
  const totalMinutes = Math.floor(ms / 60_000);
  const hours = Math.floor(totalMinutes / 60);
  const minutes = totalMinutes % 60;
  return hours > 0 ? `${hours}h ${minutes}m` : `${minutes}m`;
}

export function renderOfflineBanner(offline: boolean): string {
  if (!offline) return '';
  return '<div class="banner offline" role="alert">Gateway unreachable; reconnecting. Decisions are disabled until the connection returns.</div>';
}

export function renderPendingList(pending: TransferRequest[], nowMs: number, ttlMs: number): string {
  if (pending.length === 0) {
    return '<p class="empty">No pending requests.</p>';
  }
  const rows = pending.map((r) => {
    const remaining = formatCountdown(countdownMs(r, nowMs, ttlMs));
    return `<li class="request" data-request-id="${escapeHtml(r.request_id)}">
      <div class="who">${escapeHtml(r.requester)} <span class="class">(${escapeHtml(r.requester_class)})</span></div>
      <div class="what">wants <strong>${r.categories.map(escapeHtml).join(', ')}</strong> &middot; context ${escapeHtml(r.context)}</div>
      <div class="when">expires in ${remaining}</div>
      <div class="actions">
        <button data-action="approve" data-request-id="${escapeHtml(r.request_id)}">Approve</button>
        <button data-action="deny" data-request-id="${escapeHtml(r.request_id)}">Deny</button>
      </div>
    </li>`;
  });
  return `<ul class="pending-list">${rows.join('')}</ul>`;
}

export function renderHistory(history: TransferRequest[]): string {
  if (history.length === 0) {
    return '<p class="empty">No decided requests yet.</p>';
  }
  const rows = history.map(
    (r) => `<li class="history-item state-${escapeHtml(r.state)}" data-request-id="${escapeHtml(r.request_id)}">
      <span class="who">${escapeHtml(r.requester)}</span>
      <span class="categories">${r.categories.map(escapeHtml).join(', ')}</span>
      <span class="state">${escapeHtml(r.state)}</span>
      <span class="by">${r.decided_by ? `by ${escapeHtml(r.decided_by)}` : ''}</span>
      <span class="at">${r.decided_ms !== null ? new Date(r.decided_ms).toISOString() : ''}</span>
    </li>`,
  );
  return `<ul class="history-list">${rows.join('')}</ul>`;
}

export function renderPolicyEditor(editor: PolicyEditorState | null): string {
  if (!editor) return '<p class="empty">Loading policy…</p>';
  const header = RECIPIENT_CLASSES.map((c) => `<th>${c}</th>`).join('');
  const body = CATEGORIES.map((category) => {
    const cells = RECIPIENT_CLASSES.map((rc) => {
      const current = editor.rules[category]?.[rc] ?? 'deny';
      const options = EFFECTS.map(
        (e) => `<option value="${e}"${e === current ? ' selected' : ''}>${e}</option>`,
      ).join('');
      return `<td><select data-action="set-rule" data-category="${category}" data-recipient="${rc}">${options}</select></td>`;
    }).join('');
    return `<tr><th scope="row">${category}</th>${cells}</tr>`;
  }).join('');
  const conflict = editor.conflict
    ? `<div class="banner conflict" role="alert">Someone saved policy version ${editor.conflict.version} while you were editing.
         <button data-action="adopt-server-policy">Load their version</button> Your edits stay on screen until you choose.</div>`
    : '';
  const contextRules = editor.contextRules
    .slice()
    .sort((a, b) => a.priority - b.priority)
    .map(
      (r) => `<li>#${r.priority}: ${escapeHtml(r.effect)} when ${escapeHtml(r.recipient_class ?? 'any')} / ${escapeHtml(
        r.category ?? 'any',
      )} / ${escapeHtml(r.context ?? 'any')}</li>`,
    )
    .join('');
  return `${conflict}
  <table class="policy-grid"><thead><tr><th>category</th>${header}</tr></thead><tbody>${body}</tbody></table>
  <h3>Context rules</h3><ol class="context-rules">${contextRules || '<li class="empty">none</li>'}</ol>
  <button data-action="save-policy"${editor.dirty ? '' : ' disabled'}>Save (v${editor.serverVersion})</button>
  ${editor.dirty ? '<span class="dirty">unsaved changes</span>' : ''}`;
}

export const AUDIT_PAGE_SIZE = 20;

export function renderAudit(entries: LedgerEntry[], page = 0, pageSize = AUDIT_PAGE_SIZE): string {
  if (entries.length === 0) return '<p class="empty">The audit ledger has no blocks for you.</p>';
  const pages = Math.max(1, Math.ceil(entries.length / pageSize));
  const current = Math.min(Math.max(0, page), pages - 1);
  const slice = entries.slice(current * pageSize, (current + 1) * pageSize);
  const rows = slice.map(
    (e) => `<tr>
      <td>${e.index}</td>
      <td>${escapeHtml(e.event.kind)}</td>
      <td>${escapeHtml(e.event.request_id)}</td>
      <td>${escapeHtml(e.event.actor)}</td>
      <td>${e.event.categories.map(escapeHtml).join(', ')}</td>
      <td>${escapeHtml(e.event.decision)}</td>
      <td>${new Date(e.event.timestamp_ms).toISOString()}</td>
    </tr>`,
  );
  const pager =
    pages > 1
      ? `<div class="pager">
          <button data-action="audit-prev"${current === 0 ? ' disabled' : ''}>&laquo; newer</button>
          <span>page ${current + 1} / ${pages}</span>
          <button data-action="audit-next"${current === pages - 1 ? ' disabled' : ''}>older &raquo;</button>
        </div>`
      : '';
  return `<table class="audit"><thead><tr><th>#</th><th>kind</th><th>request</th><th>actor</th><th>categories</th><th>decision</th><th>at</th></tr></thead><tbody>${rows.join('')}</tbody></table>${pager}`;
}

export function renderNotices(notices: string[]): string {
  return notices
    .slice(-3)
    .map((n) => `<div class="notice">${escapeHtml(n)}</div>`)
    .join('');
}

export function renderApp(state: DashboardState, nowMs: number, ttlMs: number, auditPage = 0): string {
  // newest ledger entries first for the read-only audit view
  const audit = [...state.auditTrail].sort((a, b) => b.index - a.index);
  return `
  ${renderOfflineBanner(state.offline)}
  <div class="notices">${renderNotices(state.notices)}</div>
  <section id="pending"><h2>Pending requests (${state.pending.length})</h2>${renderPendingList(
    state.pending,
    nowMs,
    ttlMs,
  )}</section>
  <section id="history"><h2>History</h2>${renderHistory(state.history)}</section>
  <section id="policy"><h2>Sharing policy</h2>${renderPolicyEditor(state.editor)}</section>
  <section id="audit"><h2>Audit trail</h2>${renderAudit(audit, auditPage)}</section>`;
}
