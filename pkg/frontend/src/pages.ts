// Page renderers: pure functions from API responses to HTML strings.
// One page per capability: Devices, Instances (with provision form),
// Tasks, Policies & failover timeline, BGP Ribs, Events.  No client-held
// truth — a hard refresh re-derives everything from the API.

import { escapeHtml } from "./failoverTimeline.js";
import { formatEvent } from "./eventFeed.js";
import type {
  Device,
  EventRecord,
  InstanceRecord,
  RibSnapshot,
  ScalePolicy,
  TaskResult,
} from "./types.js";

function table(headers: string[], rows: string[][]): string {
  const head = headers.map((h) => `<th>${escapeHtml(h)}</th>`).join("");
  const body = rows
    .map(
      (cells) =>
        `<tr>${cells.map((c) => `<td>${escapeHtml(c)}</td>`).join("")}</tr>`,
    )
    .join("\n");
  return `<table><thead><tr>${head}</tr></thead><tbody>\n${body}\n</tbody></table>`;
}

export function renderDevices(devices: Device[]): string {
  return table(
    ["id", "name", "platform", "dialect", "endpoint", "reachability", "asn"],
    devices.map((d) => [
      d.id,
      d.name,
      d.platform,
      d.dialect_id,
      d.mgmt_endpoint,
      d.reachability,
      d.asn === null ? "-" : String(d.asn),
    ]),
  );
}

export function renderInstances(instances: InstanceRecord[]): string {
  const cards = instances
    .map(
      (r) =>
        `<div class="card state-${r.state}" data-id="${r.id}">` +
        `<h3>${escapeHtml(r.id)}</h3>` +
        `<p>${escapeHtml(r.type)} (${r.kind}) — ${r.state}, role ${r.role}` +
        `${r.in_service ? "" : ", out of service"}</p>` +
        (r.error === null ? "" : `<p class="error">${escapeHtml(r.error)}</p>`) +
        `</div>`,
    )
    .join("\n");
  return `<div class="cards">\n${cards}\n</div>`;
}

export function renderTaskResult(result: TaskResult): string {
  return (
    `<h3>task ${escapeHtml(result.task_id)}</h3>` +
    table(
      ["device", "outcome", "commands", "failed at", "error"],
      result.reports.map((r) => [
        r.device_id,
        r.outcome,
        String(r.commands_sent),
        r.failed_at === null ? "-" : String(r.failed_at),
        r.error ?? "-",
      ]),
    )
  );
}

export function renderPolicies(policies: ScalePolicy[]): string {
  return table(
    ["service", "threshold", "check interval", "cooldown", "max replicas", "mode"],
    policies.map((p) => [
      p.service,
      p.threshold.toFixed(2),
      `${p.check_interval_ms} ms`,
      `${p.cooldown_ms} ms`,
      String(p.max_replicas),
      p.mode,
    ]),
  );
}

export function renderRib(speakerId: string, rib: RibSnapshot): string {
  const prefixes = Object.keys(rib.loc_rib).sort();
  return (
    `<h3>loc-rib of ${escapeHtml(speakerId)}</h3>` +
    table(
      ["prefix", "next hop", "as path", "local pref", "origin", "learned from"],
      prefixes.map((prefix) => {
        const route = rib.loc_rib[prefix];
        return [
          prefix,
          route.next_hop,
          route.as_path.length === 0 ? "(local)" : route.as_path.join(" "),
          String(route.local_pref),
          route.origin,
          route.learned_from,
        ];
      }),
    )
  );
}

export function renderEvents(events: EventRecord[]): string {
  const lines = events
    .map((e) => `<li data-seq="${e.seq}">${escapeHtml(formatEvent(e))}</li>`)
    .join("\n");
  return `<ol class="event-feed">\n${lines}\n</ol>`;
}
