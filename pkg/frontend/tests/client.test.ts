import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/client.js";

function fakeFetch(
  handler: (url: string, init?: RequestInit) => { status: number; body: string },
) {
  const calls: Array<{ url: string; init?: RequestInit }> = [];
  const fetchFn = (url: string, init?: RequestInit): Promise<Response> => {
    calls.push({ url, init });
    const { status, body } = handler(url, init);
    return Promise.resolve(new Response(body, { status }));
  };
  return { fetchFn, calls };
}

describe("ApiClient", () => {
  it("parses list responses", async () => {
    const { fakeResult } = { fakeResult: '[{"id":"d-1","name":"sw1"}]' };
    const { fetchFn } = fakeFetch(() => ({ status: 200, body: fakeResult }));
    const client = new ApiClient("http://api", null, fetchFn);
    const devices = await client.listDevices();
    expect(devices).toHaveLength(1);
    expect(devices[0].id).toBe("d-1");
  });

  it("sends the bearer token on every request", async () => {
    const { fetchFn, calls } = fakeFetch(() => ({ status: 200, body: "[]" }));
    const client = new ApiClient("http://api/", "s3cret", fetchFn);
    await client.listDevices();
    const headers = calls[0].init?.headers as Record<string, string>;
    expect(headers["Authorization"]).toBe("Bearer s3cret");
    expect(calls[0].url).toBe("http://api/devices"); // trailing slash normalized
  });

  it("passes the provision payload through byte-for-byte", async () => {
    const { fetchFn, calls } = fakeFetch(() => ({
      status: 201,
      body: '{"ids":["i-1"]}',
    }));
    const client = new ApiClient("http://api", null, fetchFn);
    const payload =
      '{"host":"h1","tenant":"t1","count":2,"type":"ovs","kind":"container","validate":false,"fresh_install":false}';
    const result = await client.createInstances(payload);
    expect(result.ids).toEqual(["i-1"]);
    expect(calls[0].init?.body).toBe(payload);
    expect(calls[0].init?.method).toBe("POST");
  });

  it("surfaces the machine-readable error envelope", async () => {
    const { fetchFn } = fakeFetch(() => ({
      status: 422,
      body: '{"error":"invalid-spec","detail":"count must be >= 1"}',
    }));
    const client = new ApiClient("http://api", null, fetchFn);
    const err = await client.createInstances("{}").catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    const apiErr = err as ApiError;
    expect(apiErr.status).toBe(422);
    expect(apiErr.code).toBe("invalid-spec");
    expect(apiErr.detail).toBe("count must be >= 1");
  });

  it("wraps non-JSON error bodies instead of throwing a parse error", async () => {
    const { fetchFn } = fakeFetch(() => ({ status: 502, body: "bad gateway" }));
    const client = new ApiClient("http://api", null, fetchFn);
    const err = (await client.listDevices().catch((e: unknown) => e)) as ApiError;
    expect(err.code).toBe("http");
    expect(err.detail).toBe("bad gateway");
  });

  it("builds the events query string from since and wait_ms", async () => {
    const { fetchFn, calls } = fakeFetch(() => ({ status: 200, body: "[]" }));
    const client = new ApiClient("http://api", null, fetchFn);
    await client.events(17, 2000);
    expect(calls[0].url).toBe("http://api/events?since=17&wait_ms=2000");
  });
});
