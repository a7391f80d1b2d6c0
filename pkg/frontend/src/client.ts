// Thin fetch wrapper over the netorch HTTP API.  Errors are never
// swallowed: any non-2xx response becomes an ApiError carrying the
// server's machine-readable {error, detail} envelope.

import type {
  ApiErrorBody,
  Device,
  EventRecord,
  InstanceRecord,
  RibSnapshot,
  ScalePolicy,
  TaskResult,
} from "./types.js";

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly detail: string;

  constructor(status: number, body: ApiErrorBody) {
    super(`HTTP ${status}: ${body.error}: ${body.detail}`);
    this.status = status;
    this.code = body.error;
    this.detail = body.detail;
  }
}

export type FetchLike = (
  url: string,
  init?: RequestInit,
) => Promise<Response>;

export class ApiClient {
  private readonly base: string;
  private readonly token: string | null;
  private readonly fetchFn: FetchLike;

  constructor(base: string, token: string | null = null, fetchFn?: FetchLike) {
    this.base = base.replace(/\/$/, "");
    this.token = token;
    this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
  }

  private async request<T>(
    method: string,
    path: string,
    body?: string,
  ): Promise<T> {
    const headers: Record<string, string> = {};
    if (body !== undefined) headers["Content-Type"] = "application/json";
    if (this.token !== null) headers["Authorization"] = `Bearer ${this.token}`;
    const response = await this.fetchFn(this.base + path, {
      method,
      headers,
      body,
    });
    const text = await response.text();
    if (!response.ok) {
      let parsed: ApiErrorBody;
      try {
        parsed = JSON.parse(text) as ApiErrorBody;
      } catch {
        parsed = { error: "http", detail: text };
      }
      throw new ApiError(response.status, parsed);
    }
    return (text ? JSON.parse(text) : {}) as T;
  }

  listDevices(): Promise<Device[]> {
    return this.request("GET", "/devices");
  }

  probeDevice(id: string): Promise<{ id: string; reachability: string }> {
    return this.request("POST", `/devices/${id}/probe`);
  }

  listInstances(): Promise<InstanceRecord[]> {
    return this.request("GET", "/instances");
  }

  // body is the pre-serialized payload from the provision form, so what is
  // sent over the wire is exactly what the form promised (byte-for-byte)
  createInstances(payloadJson: string): Promise<{ ids: string[] }> {
    return this.request("POST", "/instances", payloadJson);
  }

  runTask(body: {
    targets: string[];
    desired: Record<string, unknown>;
    mode: string;
  }): Promise<TaskResult> {
    return this.request("POST", "/tasks", JSON.stringify(body));
  }

  listPolicies(): Promise<ScalePolicy[]> {
    return this.request("GET", "/policies");
  }

  addPolicy(policy: Partial<ScalePolicy> & { service: string }): Promise<ScalePolicy> {
    return this.request("POST", "/policies", JSON.stringify(policy));
  }

  rib(speakerId: string): Promise<RibSnapshot> {
    return this.request("GET", `/bgp/${speakerId}/rib`);
  }

  events(since: number, waitMs = 0): Promise<EventRecord[]> {
    return this.request("GET", `/events?since=${since}&wait_ms=${waitMs}`);
  }
}
