// Typed mirrors of the netorch API's JSON shapes.  The UI holds no truth of
// its own: every view is derived from these responses.

export type Platform = "cloud-node" | "sdn-switch" | "traditional-router";
export type Reachability = "unknown" | "reachable" | "unreachable";
export type InstanceKind = "vm" | "container";
export type InstanceState =
  | "requested"
  | "provisioning"
  | "ready"
  | "failed"
  | "terminated";

export const INSTANCE_TYPES = [
  "ryu-controller",
  "onos-controller",
  "odl-controller",
  "mininet",
  "ovs",
  "floodlight-controller",
  "dns",
  "dhcp",
] as const;
export type InstanceType = (typeof INSTANCE_TYPES)[number];

// mirror of the server-side rule: mininet needs a full VM
export const VM_ONLY_TYPES: ReadonlySet<string> = new Set(["mininet"]);

export interface Device {
  id: string;
  name: string;
  platform: Platform;
  dialect_id: string;
  mgmt_endpoint: string;
  credential_ref: string | null;
  reachability: Reachability;
  asn: number | null;
  probed_at: number | null;
}

export interface InstanceRecord {
  id: string;
  host: string;
  tenant: string;
  type: InstanceType;
  kind: InstanceKind;
  state: InstanceState;
  role: "primary" | "secondary";
  in_service: boolean;
  endpoint: string | null;
  created_at: number;
  ready_at: number | null;
  error: string | null;
}

export interface ApplyReport {
  device_id: string;
  commands_sent: number;
  outcome: "ok" | "partial" | "failed";
  failed_at: number | null;
  error: string | null;
  duration_ms: number;
  delta?: { ops: unknown[] };
}

export interface TaskResult {
  task_id: string;
  reports: ApplyReport[];
}

export interface ScalePolicy {
  service: string;
  threshold: number;
  check_interval_ms: number;
  cooldown_ms: number;
  max_replicas: number;
  mode: "failover" | "scale-out";
  smoothing_window: number;
}

export interface EventRecord {
  seq: number;
  timestamp: number;
  category: "device" | "task" | "instance" | "scale" | "bgp";
  severity: "info" | "warn" | "error";
  payload: Record<string, unknown>;
}

export interface RouteJson {
  prefix: string;
  next_hop: string;
  as_path: number[];
  local_pref: number;
  origin: "igp" | "egp" | "incomplete";
  learned_from: string;
}

export interface RibSnapshot {
  adj_rib_in: Record<string, Record<string, RouteJson>>;
  loc_rib: Record<string, RouteJson>;
  adj_rib_out: Record<string, Record<string, RouteJson>>;
}

export interface ApiErrorBody {
  error: string;
  detail: string;
}
