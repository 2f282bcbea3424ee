// Server-sent events over fetch streaming. Works in the browser and in
// node (undici) alike, which keeps the client testable; reconnects with
// exponential backoff and tells the caller when it goes offline so the
// UI can resync after the gap.

export interface SseMessage {
  event: string;
  data: string;
}

export interface SseHandlers {
  onMessage: (msg: SseMessage) => void;
  onOpen?: () => void;
  onOffline?: (error: unknown) => void;
}

// Incremental SSE parser: feed() returns completed messages, comment
// lines (heartbeats) are dropped.
export class SseParser {
  private buffer = '';

  feed(chunk: string): SseMessage[] {
    this.buffer += chunk.replace(/\r\n/g, '\n');
    const messages: SseMessage[] = [];
    let split;
    while ((split = this.buffer.indexOf('\n\n')) >= 0) {
      const block = this.buffer.slice(0, split);
      this.buffer = this.buffer.slice(split + 2);
      const msg = this.parseBlock(block);
      if (msg) messages.push(msg);
    }
    return messages;
  }

  private parseBlock(block: string): SseMessage | null {
    let event = 'message';
    const data: string[] = [];
    for (const line of block.split('\n')) {
      if (!line || line.startsWith(':')) continue;
      const colon = line.indexOf(':');
      const field = colon < 0 ? line : line.slice(0, colon);
      const value = colon < 0 ? '' : line.slice(colon + 1).replace(/^ /, '');
      if (field === 'event') event = value;
      else if (field === 'data') data.push(value);
    }
    if (data.length === 0) return null;
    return { event, data: data.join('\n') };
  }
}

const INITIAL_BACKOFF_MS = 500;
const MAX_BACKOFF_MS = 8000;

export class SseClient {
  private closed = false;
  private backoffMs = INITIAL_BACKOFF_MS;

  constructor(
    private readonly url: string,
    private readonly handlers: SseHandlers,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  start(): void {
    void this.loop();
  }

  close(): void {
    this.closed = true;
  }

  private async loop(): Promise<void> {
    while (!this.closed) {
      try {
        const res = await this.fetchImpl(this.url, {
          headers: { Accept: 'text/event-stream' },
        });
        if (!res.ok || !res.body) {
          throw new Error(`event stream returned ${res.status}`);
        }
        this.backoffMs = INITIAL_BACKOFF_MS;
        this.handlers.onOpen?.();
        const reader = res.body.getReader();
        const decoder = new TextDecoder();
        const parser = new SseParser();
        for (;;) {
          const { done, value } = await reader.read();
          if (this.closed) {
            await reader.cancel().catch(() => undefined);
            return;
          }
          if (done) break;
          for (const msg of parser.feed(decoder.decode(value, { stream: true }))) {
            this.handlers.onMessage(msg);
          }
        }
        throw new Error('event stream ended');
      } catch (error) {
        if (this.closed) return;
        this.handlers.onOffline?.(error);
        await sleep(this.backoffMs);
        this.backoffMs = Math.min(this.backoffMs * 2, MAX_BACKOFF_MS);
      }
    }
  }
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}
