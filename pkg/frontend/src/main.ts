import { ApiClient } from "./api";
import { ScheduleEditor, pollJob } from "./store";
import {
  el,
  renderEditor,
  renderGroups,
  renderMatrix,
  renderPortfolio,
  renderSetup,
  renderWhatIf,
} from "./views";
import type { GridDoc, PortfolioManifest } from "./types";

type Screen = "setup" | "groups" | "matrix" | "portfolio" | "editor" | "whatif";

interface Session {
  client: ApiClient;
  instanceId: string | null;
  grid: GridDoc | null;
  manifest: PortfolioManifest | null;
  schedules: Record<string, string>;
  editor: ScheduleEditor | null;
  teardown: (() => void) | null;
}

function apiBase(): string {
  const param = new URLSearchParams(window.location.search).get("api");
  return param ?? "http://127.0.0.1:8000";
}

const session: Session = {
  client: new ApiClient(apiBase()),
  instanceId: null,
  grid: null,
  manifest: null,
  schedules: {},
  editor: null,
  teardown: null,
};

const nav = document.getElementById("nav")!;
const content = document.getElementById("content")!;
const status = document.getElementById("status")!;

function note(text: string): void {
  status.textContent = text;
}

function requireInstance(): string {
  if (!session.instanceId) {
    note("load an instance first");
    throw new Error("no instance");
  }
  return session.instanceId;
}

async function show(screen: Screen): Promise<void> {
  session.teardown?.();
  session.teardown = null;
  try {
    if (screen === "setup") {
      renderSetup(content, {
        onUpload: async (payload) => {
          try {
            const created = await session.client.uploadInstance(payload);
            session.instanceId = created.instance_id;
            const summary = await session.client.instanceSummary(created.instance_id);
            session.grid = summary.grid;
            note(
              `instance ${created.instance_id}: ${summary.summary.groups} groups, ` +
                `${summary.summary.students} students, ${summary.summary.slots} slots`,
            );
            await show("groups");
          } catch (err) {
            note(`upload failed: ${String(err)}`);
          }
        },
      });
    } else if (screen === "groups") {
      const iid = requireInstance();
      const doc = await session.client.groups(iid);
      renderGroups(content, doc, {
        onMoveSection: async (section, target) => {
          await session.client.editGroups(iid, [[section, target]]);
          await show("groups");
        },
      });
    } else if (screen === "matrix") {
      const iid = requireInstance();
      renderMatrix(content, await session.client.overlapMatrix(iid));
    } else if (screen === "portfolio") {
      const iid = requireInstance();
      if (session.manifest) {
        renderPortfolio(content, session.manifest, session.schedules, {
          onOpenSchedule: (scheduleId) => void openEditor(scheduleId),
        });
        return;
      }
      note("running portfolio…");
      const { job_id } = await session.client.startPortfolio(iid, { seed: 1 });
      pollJob(session.client, job_id, (doc) => {
        note(`portfolio job ${doc.status}`);
        if (doc.status === "done" && doc.result) {
          session.manifest = doc.result.manifest;
          session.schedules = doc.result.schedules;
          renderPortfolio(content, session.manifest, session.schedules, {
            onOpenSchedule: (scheduleId) => void openEditor(scheduleId),
          });
        } else if (doc.status === "failed") {
          note(`portfolio failed: ${doc.error}`);
        }
      });
    } else if (screen === "whatif") {
      const iid = requireInstance();
      note("computing what-if…");
      renderWhatIf(content, await session.client.whatIf(iid, +1));
      note("");
    }
  } catch (err) {
    note(String(err));
  }
}

async function openEditor(scheduleId: string): Promise<void> {
  if (!session.grid) return;
  session.editor = new ScheduleEditor(session.client, scheduleId);
  await session.editor.load();
  session.teardown?.();
  session.teardown = renderEditor(content, session.grid, session.editor);
}

for (const screen of ["setup", "groups", "matrix", "portfolio", "whatif"] as Screen[]) {
  const button = el("button", { "data-screen": screen }, [screen]);
  button.addEventListener("click", () => void show(screen));
  nav.append(button);
}

void show("setup");
