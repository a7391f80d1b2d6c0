// Failover timeline: turns the scale/instance event stream into an ordered
// set of timeline entries for one service, so an operator can see at a
// glance that the secondary was ready before the primary was disabled.

import type { EventRecord } from "./types.js";

export interface TimelineEntry {
  seq: number;
  timestamp: number;
  kind:
    | "breach-detected"
    | "spawn-secondary"
    | "secondary-ready"
    | "disable-primary"
    | "spawn-failed";
  label: string;
  instanceId: string | null;
}

const SCALE_KINDS: Record<string, TimelineEntry["kind"]> = {
  "spawn-secondary": "spawn-secondary",
  "disable-primary": "disable-primary",
  "spawn-failed": "spawn-failed",
  "breach-detected": "breach-detected",
};

export function buildTimeline(
  events: EventRecord[],
  service: string,
): TimelineEntry[] {
  const entries: TimelineEntry[] = [];
  const ordered = [...events].sort((a, b) => a.seq - b.seq);
  // the secondary's "ready" instance event can precede the summarizing
  // spawn-secondary scale event, so collect the secondary ids up front
  const secondaryIds = new Set<string>();
  for (const e of ordered) {
    const p = e.payload as Record<string, unknown>;
    if (
      e.category === "scale" &&
      p["service"] === service &&
      p["action"] === "spawn-secondary"
    ) {
      secondaryIds.add(String(p["id"]));
    }
  }
  for (const e of ordered) {
    const p = e.payload as Record<string, unknown>;
    if (e.category === "scale" && p["service"] === service) {
      const kind = SCALE_KINDS[String(p["action"])];
      if (kind === undefined) continue;
      const id = (p["id"] ?? p["target"] ?? null) as string | null;
      entries.push({
        seq: e.seq,
        timestamp: e.timestamp,
        kind,
        label: labelFor(kind, p),
        instanceId: id,
      });
    } else if (
      e.category === "instance" &&
      p["action"] === "state" &&
      p["state"] === "ready" &&
      secondaryIds.has(String(p["id"]))
    ) {
      entries.push({
        seq: e.seq,
        timestamp: e.timestamp,
        kind: "secondary-ready",
        label: `secondary ${String(p["id"])} ready`,
        instanceId: String(p["id"]),
      });
    }
  }
  return entries;
}

function labelFor(
  kind: TimelineEntry["kind"],
  p: Record<string, unknown>,
): string {
  switch (kind) {
    case "breach-detected":
      return `breach detected (${String(p["reason"] ?? "unknown")})`;
    case "spawn-secondary":
      return `spawned secondary ${String(p["id"])} (${String(p["reason"])})`;
    case "disable-primary":
      return `disabled primary ${String(p["target"])}, promoted ${String(p["promoted"])}`;
    case "spawn-failed":
      return `secondary spawn failed: ${String(p["error"])}`;
    case "secondary-ready":
      return "secondary ready";
  }
}

// Invariant the timeline visualizes: within each failover, the spawn
// completes (entry present) strictly before the primary is disabled.
export function spawnBeforeDisable(entries: TimelineEntry[]): boolean {
  let lastSpawnSeq: number | null = null;
  for (const entry of entries) {
    if (entry.kind === "spawn-secondary") lastSpawnSeq = entry.seq;
    if (entry.kind === "disable-primary") {
      if (lastSpawnSeq === null || lastSpawnSeq >= entry.seq) return false;
      lastSpawnSeq = null; // consume: each disable needs its own spawn
    }
  }
  return true;
}

export function renderTimeline(entries: TimelineEntry[]): string {
  const ok = spawnBeforeDisable(entries);
  const rows = entries
    .map(
      (e) =>
        `<li class="tl-${e.kind}" data-seq="${e.seq}">` +
        `<span class="tl-seq">#${e.seq}</span> ${escapeHtml(e.label)}</li>`,
    )
    .join("\n");
  const badge = ok
    ? '<span class="tl-badge tl-ok">spawn-before-disable: ok</span>'
    : '<span class="tl-badge tl-violation">ordering violation</span>';
  return `<div class="timeline">${badge}<ol>\n${rows}\n</ol></div>`;
}

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}
