// Live-service protocol test: drives the same client + session code the
// browser UI runs against a real generated dataset served by the backend.
// Covers the acceptance rules end to end: a 2-of-3 discard removes a view
// from the export, a solid left with exactly 3 kept views disappears
// entirely, and re-exporting is byte-identical.

import { execFileSync, spawn, ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { CurationApi, ViewInfo } from "../src/api.js";
import { reviewSummary } from "../src/session.js";

const PORT = 8642;
const BASE = `http://127.0.0.1:${PORT}`;
const ROSTER = ["alice", "bob", "carol"];

let dataRoot: string;
let server: ChildProcess | undefined;
const api = new CurationApi(BASE);

async function serverReady(timeoutMs: number): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    try {
      const res = await fetch(`${BASE}/api/config`);
      if (res.ok) return;
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) throw new Error("curation service did not come up");
    await new Promise((r) => setTimeout(r, 250));
  }
}

beforeAll(async () => {
  dataRoot = mkdtempSync(join(tmpdir(), "curation-ui-"));
  execFileSync(
    "python3",
    ["-m", "howire.cli", "generate", "--seed", "11", "--solids", "5", "--views", "8",
     "--data-root", dataRoot],
    { stdio: "pipe" },
  );
  const boot =
    "import uvicorn\n" +
    "from howire.config import ToolConfig\n" +
    "from howire.service import create_app\n" +
    `app = create_app(ToolConfig(data_root=${JSON.stringify(dataRoot)}))\n` +
    `uvicorn.run(app, host="127.0.0.1", port=${PORT}, log_level="warning")\n`;
  server = spawn("python3", ["-c", boot], { stdio: "ignore" });
  await serverReady(60_000);
}, 120_000);

afterAll(() => {
  server?.kill();
  if (dataRoot) rmSync(dataRoot, { recursive: true, force: true });
});

async function allViews(): Promise<Map<number, ViewInfo[]>> {
  const bySolid = new Map<number, ViewInfo[]>();
  for (const solid of await api.solids()) {
    bySolid.set(solid.solid_id, await api.views(solid.solid_id));
  }
  return bySolid;
}

describe("curation protocol against the live service", () => {
  it("applies the majority and solid-removal rules to the export", async () => {
    const solids = await api.solids();
    expect(solids.length).toBeGreaterThan(1);
    const bySolid = await allViews();
    const totalViews = [...bySolid.values()].reduce((n, v) => n + v.length, 0);

    // the voters keep everything by default
    for (const views of bySolid.values()) {
      for (const view of views) {
        for (const voter of ROSTER) {
          const ack = await api.castVote(view.view_id, voter, true);
          expect(ack.keep).toBe(true);
        }
      }
    }

    // 2 of 3 voters discard one view of a big solid
    const bigSolid = solids.reduce((a, b) => (a.view_count >= b.view_count ? a : b));
    expect(bigSolid.view_count).toBeGreaterThan(4);
    const bigViews = bySolid.get(bigSolid.solid_id)!;
    const discardedView = bigViews[0].view_id;
    await api.castVote(discardedView, "bob", false);
    await api.castVote(discardedView, "carol", false);

    // a different solid is argued down to exactly 3 kept views
    const victim = solids
      .filter((s) => s.solid_id !== bigSolid.solid_id && s.view_count > 3)
      .reduce((a, b) => (a.view_count >= b.view_count ? a : b));
    const victimViews = bySolid.get(victim.solid_id)!;
    for (const view of victimViews.slice(3)) {
      await api.castVote(view.view_id, "alice", false);
      await api.castVote(view.view_id, "bob", false);
    }

    // the review screen (same logic the UI renders) sees server tallies
    const summary = reviewSummary(await api.solids(), await allViews(), ROSTER);
    const victimRow = summary.solids.find((s) => s.solid_id === victim.solid_id)!;
    expect(victimRow.kept_count).toBe(3);
    expect(victimRow.flagged_for_removal).toBe(true);
    expect(summary.export_enabled).toBe(true);

    const exported = await api.export();
    const keptIds = new Set(
      Object.values(exported).flatMap((split) => split.samples.map((s) => s.sample_id)),
    );
    expect(keptIds.has(discardedView)).toBe(false); // majority discard
    for (const view of victimViews) {
      expect(keptIds.has(view.view_id)).toBe(false); // whole solid removed
    }
    // everything else survives
    expect(keptIds.size).toBe(totalViews - 1 - victimViews.length);

    // re-export is byte-identical
    const raw1 = await (await fetch(`${BASE}/api/export`)).text();
    const raw2 = await (await fetch(`${BASE}/api/export`)).text();
    expect(raw1).toBe(raw2);
  }, 120_000);

  it("rejects voters outside the roster and unknown views", async () => {
    const bySolid = await allViews();
    const anyView = [...bySolid.values()][0][0].view_id;
    await expect(api.castVote(anyView, "mallory", true)).rejects.toThrow(/roster/);
    await expect(api.castVote("s9999_v99", "alice", true)).rejects.toThrow(/unknown view/);
  });

  it("serves thumbnails and overlay renders for the gallery", async () => {
    const bySolid = await allViews();
    const anyView = [...bySolid.values()][0][0].view_id;
    const plain = await fetch(api.imageUrl(anyView, false));
    const overlay = await fetch(api.imageUrl(anyView, true));
    expect(plain.status).toBe(200);
    expect(plain.headers.get("content-type")).toBe("image/png");
    expect(overlay.status).toBe(200);
    const a = new Uint8Array(await plain.arrayBuffer());
    const b = new Uint8Array(await overlay.arrayBuffer());
    expect(a.length).toBeGreaterThan(100);
    expect(Buffer.from(a).equals(Buffer.from(b))).toBe(false);
  });
});
