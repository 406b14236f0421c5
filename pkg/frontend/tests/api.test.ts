import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiError, CurationApi } from "../src/api.js";

function mockFetch(status: number, body: unknown) {
  const fn = vi.fn().mockResolvedValue({
    ok: status >= 200 && status < 300,
    status,
    statusText: `HTTP ${status}`,
    json: () => Promise.resolve(body),
  });
  vi.stubGlobal("fetch", fn);
  return fn;
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("CurationApi", () => {
  it("fetches the solid list", async () => {
    const fn = mockFetch(200, [{ solid_id: 0, view_count: 4, kept_count: 4 }]);
    const api = new CurationApi("");
    const solids = await api.solids();
    expect(fn).toHaveBeenCalledWith("/api/solids");
    expect(solids[0].view_count).toBe(4);
  });

  it("posts votes as JSON with voter identity", async () => {
    const fn = mockFetch(200, { view_id: "v", voter: "alice", keep: false, warning: null });
    const api = new CurationApi("");
    const ack = await api.castVote("s0001_v02", "alice", false);
    expect(ack.keep).toBe(false);
    const [url, init] = fn.mock.calls[0];
    expect(url).toBe("/api/views/s0001_v02/vote");
    expect(init.method).toBe("POST");
    expect(JSON.parse(init.body)).toEqual({ voter: "alice", keep: false });
  });

  it("surfaces server error payloads as ApiError", async () => {
    mockFetch(404, { detail: "unknown view nope" });
    const api = new CurationApi("");
    await expect(api.castVote("nope", "alice", true)).rejects.toThrow(ApiError);
    await expect(api.castVote("nope", "alice", true)).rejects.toThrow("unknown view nope");
  });

  it("surfaces export refusals with the error body", async () => {
    mockFetch(409, { error: "3 views lack complete votes" });
    const api = new CurationApi("");
    await expect(api.export()).rejects.toThrow("3 views lack complete votes");
  });

  it("builds image URLs with the overlay toggle", () => {
    const api = new CurationApi("");
    expect(api.imageUrl("s0_v1", false)).toBe("/api/views/s0_v1/image.png");
    expect(api.imageUrl("s0_v1", true)).toBe("/api/views/s0_v1/image.png?overlay=1");
  });

  it("passes allow_partial through to the export endpoint", async () => {
    const fn = mockFetch(200, {});
    const api = new CurationApi("");
    await api.export(true);
    expect(fn).toHaveBeenCalledWith("/api/export?allow_partial=1");
  });
});
