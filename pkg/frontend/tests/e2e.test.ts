// End-to-end against the real HTTP service: spawns it with uvicorn, loads
// the bundled sample files, and drives the editor store exactly as the
// browser views do.
import { spawn, type ChildProcess } from "node:child_process";
import { readFileSync } from "node:fs";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api";
import { ScheduleEditor } from "../src/store";
import { REPORT_ROW_ORDER, type MoveResponse } from "../src/types";

const FIXTURES = join(__dirname, "..", "..", "src", "examsched", "fixtures");
const PORT = 8765 + Math.floor(Math.random() * 500);
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess;
let client: ApiClient;
let instanceId: string;

async function waitForHealth(timeoutMs = 30_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(`${BASE}/health`);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 200));
  }
  throw new Error("service did not come up");
}

beforeAll(async () => {
  server = spawn(
    "python3",
    ["-m", "uvicorn", "examsched.service:app", "--port", String(PORT), "--log-level", "warning"],
    { stdio: "ignore" },
  );
  await waitForHealth();
  client = new ApiClient(BASE);
  const upload = await client.uploadInstance({
    enrollments: readFileSync(join(FIXTURES, "enrollments.csv"), "utf-8"),
    sections: readFileSync(join(FIXTURES, "sections.csv"), "utf-8"),
    constraints: readFileSync(join(FIXTURES, "constraints.csv"), "utf-8"),
    coordinated: readFileSync(join(FIXTURES, "coordinated.txt"), "utf-8"),
  });
  instanceId = upload.instance_id;
}, 60_000);

afterAll(() => {
  server?.kill();
});

function recordingClient(): { client: ApiClient; last: () => MoveResponse | null } {
  let lastResponse: MoveResponse | null = null;
  const recorder = new (class extends ApiClient {
    override async move(scheduleId: string, group: string, targetSlot: number): Promise<MoveResponse> {
      const response = await super.move(scheduleId, group, targetSlot);
      lastResponse = response;
      return response;
    }
    override async undo(scheduleId: string): Promise<MoveResponse> {
      const response = await super.undo(scheduleId);
      lastResponse = response;
      return response;
    }
  })(BASE);
  return { client: recorder, last: () => lastResponse };
}

async function freshSchedule(): Promise<string> {
  const groups = await client.groups(instanceId);
  const assignment: Record<string, number> = {};
  groups.groups.forEach((group, i) => {
    assignment[group.label] = group.pinned_slot ?? (2 * i + 1) % 20;
  });
  const doc = await client.createSchedule(instanceId, assignment, "e2e");
  return doc.schedule_id;
}

describe("editor against the live service", () => {
  it("a legal drag move updates the report panel to the response, field for field", async () => {
    const { client: recorder, last } = recordingClient();
    const editor = new ScheduleEditor(recorder, await freshSchedule());
    await editor.load();

    const outcome = await editor.dropOn("TR-1300", 2);
    expect(outcome).toBe("applied");
    const response = last();
    expect(response).not.toBeNull();

    // the panel state equals the apply-move response, not a local estimate
    expect(editor.report).toStrictEqual(response!.report);
    expect(editor.getState().board).toStrictEqual(response!.assignment);
    expect(editor.getState().lastDelta).toStrictEqual(response!.delta);
    for (const label of REPORT_ROW_ORDER) {
      expect(editor.report!.rows[label]).toBe(response!.report.rows[label]);
    }

    // and the server agrees on a fresh read
    const fresh = await client.schedule(editor.getState().scheduleId);
    expect(editor.report).toStrictEqual(fresh.report);
  }, 30_000);

  it("a blocked move snaps back and shows the violated rule", async () => {
    const editor = new ScheduleEditor(client, await freshSchedule());
    await editor.load();
    const before = editor.getState().board["TR-0930"];
    expect(before).not.toBe(0);

    // the sample constraints forbid TR-0930 at slot 0
    const outcome = await editor.dropOn("TR-0930", 0);
    expect(outcome).toBe("rejected");
    expect(editor.getState().board["TR-0930"]).toBe(before);
    expect(editor.getState().violation?.rule).toBe("blocked");
    expect(editor.getState().violation?.group).toBe("TR-0930");

    // the server was never changed
    const fresh = await client.schedule(editor.getState().scheduleId);
    expect(fresh.assignment["TR-0930"]).toBe(before);
  }, 30_000);

  it("a pinned group refuses to move and reports the pin rule", async () => {
    const editor = new ScheduleEditor(client, await freshSchedule());
    await editor.load();
    const outcome = await editor.dropOn("CALC1", 5);
    expect(outcome).toBe("rejected");
    expect(editor.getState().violation?.rule).toBe("pinned");
  }, 30_000);

  it("undo restores the exact prior report", async () => {
    const editor = new ScheduleEditor(client, await freshSchedule());
    await editor.load();
    const before = editor.report;
    await editor.dropOn("MWF-1400", 6);
    expect(editor.report).not.toStrictEqual(before);
    expect(await editor.undo()).toBe(true);
    expect(editor.report).toStrictEqual(before);
  }, 30_000);

  it("the service rejects unknown groups cleanly", async () => {
    const sid = await freshSchedule();
    await expect(client.move(sid, "GHOST", 1)).rejects.toSatisfy(
      (err: unknown) => err instanceof ApiError && err.status === 404,
    );
  }, 30_000);
});
