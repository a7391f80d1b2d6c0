// Live event feed with the since-resume contract: events render in seq
// order, with no duplicates across reconnects, because the cursor only
// moves forward and anything at or below it is dropped.

import type { EventRecord } from "./types.js";

export class EventFeed {
  private cursor: number;
  private readonly records: EventRecord[] = [];

  constructor(since = 0) {
    this.cursor = since;
  }

  // seq to resume from after a stream loss
  get since(): number {
    return this.cursor;
  }

  get rendered(): readonly EventRecord[] {
    return this.records;
  }

  // Ingest one batch from GET /events?since=...; returns the newly
  // accepted records (already in seq order).
  ingest(batch: EventRecord[]): EventRecord[] {
    const fresh = batch
      .filter((e) => e.seq > this.cursor)
      .sort((a, b) => a.seq - b.seq);
    for (const record of fresh) {
      this.records.push(record);
      this.cursor = record.seq;
    }
    return fresh;
  }
}

export interface PollerOptions {
  intervalMs?: number; // polling fallback cadence
  backoffBaseMs?: number; // first reconnect delay after an error
  backoffMaxMs?: number;
}

// Long-poll loop feeding an EventFeed, reconnecting with exponential
// backoff on stream loss and resuming from the feed's cursor.
export async function pollEvents(
  fetchBatch: (since: number) => Promise<EventRecord[]>,
  feed: EventFeed,
  onBatch: (fresh: EventRecord[]) => void,
  shouldStop: () => boolean,
  sleep: (ms: number) => Promise<void>,
  options: PollerOptions = {},
): Promise<void> {
  const interval = options.intervalMs ?? 2000;
  const base = options.backoffBaseMs ?? 500;
  const max = options.backoffMaxMs ?? 8000;
  let failures = 0;
  while (!shouldStop()) {
    try {
      const batch = await fetchBatch(feed.since);
      failures = 0;
      const fresh = feed.ingest(batch);
      if (fresh.length > 0) onBatch(fresh);
      await sleep(interval);
    } catch {
      failures += 1;
      await sleep(Math.min(max, base * 2 ** (failures - 1)));
    }
  }
}

export function formatEvent(e: EventRecord): string {
  const payload = JSON.stringify(e.payload, Object.keys(e.payload).sort());
  return `${String(e.seq).padStart(6, " ")}  ${e.category.padEnd(8, " ")}` +
    `${e.severity.padEnd(6, " ")} ${payload}`;
}
