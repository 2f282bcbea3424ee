// Browser entry: wires the store, the SSE feed, and DOM event delegation.

import { GatewayClient } from './api.js';
import { renderApp } from './render.js';
import { SseClient } from './sse.js';
import { DashboardStore, DEFAULT_TTL_MS } from './store.js';
import type { Effect, RecipientClass } from './types.js';

function currentUser(): string {
  return new URLSearchParams(window.location.search).get('user') ?? 'ada';
}

function main(): void {
  const root = document.getElementById('app');
  if (!root) throw new Error('missing #app container');
  const base = window.location.origin;
  const client = new GatewayClient(base);
  const store = new DashboardStore(client, currentUser());

  let auditPage = 0;
  const render = () => {
    root.innerHTML = renderApp(store.snapshot(), Date.now(), DEFAULT_TTL_MS, auditPage);
  };
  store.subscribe(render);

  root.addEventListener('click', (event) => {
    const target = (event.target as HTMLElement).closest('[data-action]');
    if (!(target instanceof HTMLElement)) return;
    const action = target.dataset.action;
    const requestId = target.dataset.requestId;
    if (action === 'approve' && requestId) void store.decide(requestId, 'allow');
    else if (action === 'deny' && requestId) void store.decide(requestId, 'deny');
    else if (action === 'save-policy') void store.savePolicy();
    else if (action === 'adopt-server-policy') store.adoptServerPolicy();
    else if (action === 'audit-prev') {
      auditPage = Math.max(0, auditPage - 1);
      render();
    } else if (action === 'audit-next') {
      auditPage += 1;
      render();
    }
  });

  root.addEventListener('change', (event) => {
    const target = event.target as HTMLSelectElement;
    if (target.dataset.action !== 'set-rule') return;
    store.setRule(
      target.dataset.category as string,
      target.dataset.recipient as RecipientClass,
      target.value as Effect,
    );
  });

  const sse = new SseClient(`${base}/events`, {
    onMessage: (msg) => store.handleSse(msg),
    onOpen: () => void store.markOnline(),
    onOffline: () => store.markOffline(),
  });

  void store.resync().then(() => store.loadPolicy());
  sse.start();
  setInterval(render, 30_000); // keep the expiry countdowns fresh

  window.addEventListener('beforeunload', () => sse.close());
}

main();
