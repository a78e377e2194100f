import type { ScheduleEditor } from "./store";
import type {
  GridDoc,
  GroupingDoc,
  OverlapMatrixDoc,
  PortfolioManifest,
  WhatIfDoc,
} from "./types";
import { REPORT_ROW_ORDER } from "./types";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  children: (Node | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  for (const child of children) {
    node.append(child);
  }
  return node;
}

function clear(root: HTMLElement): void {
  while (root.firstChild) root.removeChild(root.firstChild);
}

// --- setup screen -----------------------------------------------------------

export interface SetupCallbacks {
  onUpload: (payload: { enrollments: string; sections: string; constraints: string; coordinated: string }) => void;
}

export function renderSetup(root: HTMLElement, callbacks: SetupCallbacks): void {
  clear(root);
  const fields: [string, string][] = [
    ["enrollments", "student_id,course_code,section_id"],
    ["sections", "course_code,section_id,meeting_pattern,faculty_ids"],
    ["constraints", "kind,group_label,slot"],
    ["coordinated", "one coordinated course code per line"],
  ];
  const areas: Record<string, HTMLTextAreaElement> = {};
  const form = el("div", { class: "setup" });
  form.append(el("h2", {}, ["Semester setup"]));
  for (const [name, hint] of fields) {
    const area = el("textarea", { rows: "6", placeholder: hint, "data-field": name });
    areas[name] = area;
    form.append(el("label", {}, [`${name}`]), area);
  }
  const button = el("button", {}, ["Load instance"]);
  button.addEventListener("click", () => {
    callbacks.onUpload({
      enrollments: areas.enrollments!.value,
      sections: areas.sections!.value,
      constraints: areas.constraints!.value,
      coordinated: areas.coordinated!.value,
    });
  });
  form.append(button);
  root.append(form);
}

// --- grouping review --------------------------------------------------------

export interface GroupsCallbacks {
  onMoveSection: (section: string, targetLabel: string) => void;
}

export function renderGroups(root: HTMLElement, doc: GroupingDoc, callbacks: GroupsCallbacks): void {
  clear(root);
  root.append(el("h2", {}, [`Course groups (revision ${doc.revision})`]));
  const flagged = new Map(doc.ambiguous_sections.map((a) => [a.section, a.candidates]));
  const table = el("table", { class: "groups" });
  table.append(
    el("tr", {}, [
      el("th", {}, ["group"]),
      el("th", {}, ["kind"]),
      el("th", {}, ["students"]),
      el("th", {}, ["sections"]),
    ]),
  );
  for (const group of doc.groups) {
    const sectionsCell = el("td", {});
    for (const section of group.sections) {
      const chip = el("span", { class: "section-chip", "data-section": section }, [section]);
      const candidates = flagged.get(section);
      if (candidates) {
        chip.classList.add("ambiguous");
        chip.title = `ambiguous; candidates: ${candidates.join(", ") || "none"}`;
        chip.append(el("span", { class: "flag" }, [" ⚑"]));
        const select = el("select", { class: "candidate-select" });
        select.append(el("option", { value: "" }, ["move to…"]));
        for (const candidate of candidates) {
          if (candidate !== group.label) {
            select.append(el("option", { value: candidate }, [candidate]));
          }
        }
        select.addEventListener("change", () => {
          if (select.value) callbacks.onMoveSection(section, select.value);
        });
        chip.append(select);
      }
      sectionsCell.append(chip);
    }
    table.append(
      el("tr", { "data-group": group.label }, [
        el("td", {}, [group.label + (group.pinned_slot !== null ? " 📌" : "")]),
        el("td", {}, [group.kind]),
        el("td", {}, [String(group.n_students)]),
        sectionsCell,
      ]),
    );
  }
  root.append(table);
  if (doc.forced_overlap_pairs.length) {
    root.append(
      el("p", { class: "note" }, [
        `${doc.forced_overlap_pairs.length} forced overlap pair(s) excluded from unforced counts.`,
      ]),
    );
  }
}

// --- overlap matrix ---------------------------------------------------------

export function renderMatrix(root: HTMLElement, doc: OverlapMatrixDoc): void {
  clear(root);
  root.append(el("h2", {}, ["Co-enrollment by group pair"]));
  const table = el("table", { class: "matrix" });
  const header = el("tr", {}, [el("th", {}, [""])]);
  for (const label of doc.labels) {
    header.append(el("th", {}, [label]));
  }
  table.append(header);
  doc.labels.forEach((rowLabel, i) => {
    const row = el("tr", {}, [el("th", {}, [rowLabel])]);
    doc.labels.forEach((colLabel, j) => {
      const current = doc.current[i]![j]!;
      const hist = doc.historical ? doc.historical[i]![j]! : -1;
      const cell = el("td", { class: current > 0 && i !== j ? "hot" : "" }, [String(current)]);
      // hover shows the current and, when known, prior-term count
      cell.title =
        hist >= 0
          ? `${rowLabel} x ${colLabel}: ${current} now, ${hist} last time`
          : `${rowLabel} x ${colLabel}: ${current} now`;
      if (hist >= 0 && hist !== current) {
        cell.append(el("span", { class: current > hist ? "up" : "down" }, [current > hist ? " ▲" : " ▼"]));
      }
      row.append(cell);
    });
    table.append(row);
  });
  root.append(table);
}

// --- portfolio dashboard ----------------------------------------------------

export interface PortfolioCallbacks {
  onOpenSchedule: (scheduleId: string) => void;
}

export function renderPortfolio(
  root: HTMLElement,
  manifest: PortfolioManifest,
  schedules: Record<string, string>,
  callbacks: PortfolioCallbacks,
): void {
  clear(root);
  root.append(el("h2", {}, ["Schedule portfolio"]));
  const cards = el("div", { class: "cards" });
  for (const [name, best] of Object.entries(manifest.best)) {
    const card = el("div", { class: "card", "data-weight-set": name });
    card.append(el("h3", {}, [`${name} (k=${best.k})`]));
    const list = el("table", { class: "report" });
    for (const label of REPORT_ROW_ORDER) {
      list.append(el("tr", {}, [el("td", {}, [label]), el("td", {}, [String(best.report_rows[label] ?? "")])]));
    }
    card.append(list);
    card.append(el("p", {}, [`objective ${best.objective}`]));
    const open = el("button", {}, ["Open in editor"]);
    const scheduleId = schedules[name];
    open.addEventListener("click", () => {
      if (scheduleId) callbacks.onOpenSchedule(scheduleId);
    });
    card.append(open);
    cards.append(card);
  }
  root.append(cards);
  const runs = el("details", {}, [el("summary", {}, [`${manifest.runs.length} runs`])]);
  const table = el("table", { class: "runs" });
  table.append(
    el("tr", {}, [el("th", {}, ["weight set"]), el("th", {}, ["k"]), el("th", {}, ["status"]), el("th", {}, ["objective"])]),
  );
  for (const run of manifest.runs) {
    table.append(
      el("tr", {}, [
        el("td", {}, [run.weight_set]),
        el("td", {}, [String(run.k)]),
        el("td", {}, [run.status]),
        el("td", {}, [run.objective === null ? "—" : String(run.objective)]),
      ]),
    );
  }
  runs.append(table);
  root.append(runs);
}

// --- what-if table -----------------------------------------------------------

export function renderWhatIf(root: HTMLElement, doc: WhatIfDoc): void {
  clear(root);
  root.append(el("h2", {}, ["Exam-period what-if"]));
  const table = el("table", { class: "whatif" });
  const header = el("tr", {}, [el("th", {}, ["metric"])]);
  const columns: { name: string; column: "base" | "modified" }[] = [];
  for (const [name, pair] of Object.entries(doc.weight_sets)) {
    header.append(el("th", {}, [`${name}: ${pair.base.label}`]));
    header.append(el("th", {}, [`${name}: ${pair.modified.label}`]));
    columns.push({ name, column: "base" }, { name, column: "modified" });
  }
  table.append(header);
  for (const metric of doc.metric_rows) {
    const row = el("tr", {}, [el("td", {}, [metric])]);
    for (const { name, column } of columns) {
      const cell = doc.weight_sets[name]![column];
      row.append(el("td", {}, [cell.feasible && cell.rows ? String(cell.rows[metric]) : "infeasible"]));
    }
    table.append(row);
  }
  root.append(table);
}

// --- schedule editor ---------------------------------------------------------

export function renderEditor(root: HTMLElement, grid: GridDoc, editor: ScheduleEditor): () => void {
  clear(root);
  const board = el("div", { class: "board" });
  const panel = el("div", { class: "panel" });
  const banner = el("div", { class: "banner", role: "alert" });
  const undoButton = el("button", {}, ["Undo last move"]);
  undoButton.addEventListener("click", () => void editor.undo());
  root.append(el("h2", {}, ["Schedule editor"]), banner, board, panel, undoButton);

  const maxSeq = Math.max(...grid.slots.map((s) => s.seq));

  const draw = () => {
    const state = editor.getState();
    clear(board);
    const table = el("table", { class: "slots" });
    const header = el("tr", {}, [el("th", {}, [""])]);
    for (const day of grid.days) {
      header.append(el("th", {}, [day.label]));
    }
    table.append(header);
    const byCell = new Map<number, string[]>();
    for (const [group, slot] of Object.entries(state.board)) {
      const chips = byCell.get(slot) ?? [];
      chips.push(group);
      byCell.set(slot, chips);
    }
    for (let seq = 0; seq <= maxSeq; seq++) {
      const row = el("tr", {}, [el("th", {}, [seq === maxSeq ? "night" : `slot ${seq + 1}`])]);
      for (const day of grid.days) {
        const slot = grid.slots.find((s) => s.day === day.index && s.seq === seq);
        if (!slot) {
          row.append(el("td", { class: "void" }, []));
          continue;
        }
        const cell = el("td", {
          class: `cell${slot.available ? "" : " unavailable"}`,
          "data-slot": String(slot.id),
        });
        cell.addEventListener("dragover", (event) => event.preventDefault());
        cell.addEventListener("drop", (event) => {
          event.preventDefault();
          const group = event.dataTransfer?.getData("text/group");
          if (group) void editor.dropOn(group, slot.id);
        });
        for (const group of (byCell.get(slot.id) ?? []).sort()) {
          const chip = el("span", { class: "chip", draggable: "true", "data-chip": group }, [group]);
          chip.addEventListener("dragstart", (event) => {
            event.dataTransfer?.setData("text/group", group);
          });
          cell.append(chip);
        }
        row.append(cell);
      }
      table.append(row);
    }
    board.append(table);

    clear(panel);
    const report = editor.report;
    if (report) {
      const list = el("table", { class: "report", "data-role": "report-panel" });
      for (const label of REPORT_ROW_ORDER) {
        list.append(
          el("tr", {}, [el("td", {}, [label]), el("td", { "data-metric": label }, [String(report.rows[label])])]),
        );
      }
      list.append(
        el("tr", { class: "total" }, [
          el("td", {}, ["Weighted objective"]),
          el("td", { "data-metric": "objective" }, [String(report.weighted_objective)]),
        ]),
      );
      panel.append(list);
      if (state.lastDelta) {
        panel.append(el("p", { class: "delta" }, [`last move changed objective by ${state.lastDelta.weighted_objective}`]));
      }
    }

    clear(banner);
    if (state.violation) {
      banner.append(
        el("span", { class: "violation" }, [
          `move of ${state.violation.group} rejected: ${state.violation.rule}`,
        ]),
      );
    } else if (state.error) {
      banner.append(el("span", { class: "error" }, [state.error]));
    } else if (state.doc?.stale) {
      banner.append(el("span", { class: "stale" }, ["instance changed; re-validate this schedule"]));
    }
  };

  const unsubscribe = editor.subscribe(draw);
  draw();
  return unsubscribe;
}
