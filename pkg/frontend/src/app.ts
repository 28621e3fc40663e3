/** Analyser application: session picker, timeline with hierarchy, flame
 * panes, code preview, roofline plot. All data comes from /api/v1; this
 * layer only lays out and draws. */

import { Client, ApiRequestError } from "./api.js";
import { OFF_CPU_BLUE, ON_CPU_RED, HIGHLIGHT } from "./colors.js";
import {
  chronBounds,
  highlightTest,
  hitTest,
  layoutChron,
  layoutFlame,
  nodeAt,
  searchBadgeText,
  type FlameLayout,
} from "./flame_view.js";
import { generalAnalyses, rooflineSeries, toSvgPoint, ROOFLINE_MENU_LABEL } from "./roofline_view.js";
import { annotateSource, spawnHighlight } from "./source_view.js";
import { ViewState, type Pane } from "./state.js";
import { bandGeometry, timelineRows, type TimelineRow } from "./timeline_view.js";
import type { FlameNode, SessionManifest, Timeline, Tree } from "./types.js";

const ROW_HEIGHT = 22;
const FLAME_ROW = 20;

const state = new ViewState();
const client = new Client((url) => fetch(url));

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function byId(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function showError(target: HTMLElement, err: unknown): void {
  const message = err instanceof Error ? err.message : String(err);
  const box = el("div", "error-box", message);
  target.replaceChildren(box);
}

// ---------------------------------------------------------------- sessions

async function boot(): Promise<void> {
  const picker = byId("sessions");
  try {
    const sessions = await client.sessions();
    picker.replaceChildren();
    if (sessions.length === 0) {
      picker.append(el("p", "hint", "No sessions found under the results root."));
      return;
    }
    for (const manifest of sessions) {
      picker.append(sessionCard(manifest));
    }
  } catch (err) {
    showError(picker, err);
  }
}

function sessionCard(manifest: SessionManifest): HTMLElement {
  const card = el("button", "session-card");
  card.append(el("span", "session-id", manifest.id));
  const date = new Date(manifest.wall_start / 1e6).toISOString();
  card.append(
    el(
      "span",
      "session-meta",
      `${manifest.command || "(no command)"} on ${manifest.hostname} - ` +
        `${manifest.thread_count} threads - ${date}` +
        (manifest.truncated ? " - TRUNCATED" : ""),
    ),
  );
  card.addEventListener("click", () => void openSession(manifest.id));
  return card;
}

// ---------------------------------------------------------------- timeline

async function openSession(session: string): Promise<void> {
  const main = byId("timeline");
  main.replaceChildren(el("p", "hint", `loading ${session}...`));
  try {
    const tree = await client.tree(session);
    const rows = timelineRows(tree);
    const timelines = new Map<number, Timeline>();
    await Promise.all(
      rows.map(async (row) => {
        timelines.set(row.tid, await client.timeline(session, row.tid));
      }),
    );
    renderTimeline(session, tree, rows, timelines);
    await renderGeneralAnalyses(session);
  } catch (err) {
    showError(main, err);
  }
}

function sessionBounds(rows: TimelineRow[]): [number, number] {
  const start = Math.min(0, ...rows.map((r) => r.spawnT));
  const end = Math.max(1, ...rows.map((r) => r.exitT));
  return [start, end];
}

function renderTimeline(
  session: string,
  tree: Tree,
  rows: TimelineRow[],
  timelines: Map<number, Timeline>,
): void {
  const main = byId("timeline");
  main.replaceChildren();
  const [viewStart, viewEnd] = sessionBounds(rows);
  const table = el("div", "timeline-grid");
  const bandWidth = 720;

  for (const row of rows) {
    const labelCell = el("div", "tl-label");
    labelCell.style.paddingLeft = `${8 + row.depth * 16}px`;
    const kindMark = row.kind === "thread" ? "~" : "#";
    labelCell.append(el("span", "tl-kind", kindMark));
    labelCell.append(el("span", "tl-name", row.label));
    if (row.implicit) labelCell.append(el("span", "tl-flag", "implicit"));
    if (row.openEnded) labelCell.append(el("span", "tl-flag", "open"));
    labelCell.title = `tid ${row.tid}`;

    const bandCell = el("div", "tl-band");
    bandCell.style.height = `${ROW_HEIGHT - 6}px`;
    const timeline = timelines.get(row.tid);
    if (timeline) {
      for (const band of bandGeometry(timeline, viewStart, viewEnd, bandWidth)) {
        const div = el("div", "tl-segment");
        div.style.left = `${(band.x0 / bandWidth) * 100}%`;
        div.style.width = `${Math.max(0.15, ((band.x1 - band.x0) / bandWidth) * 100)}%`;
        div.style.background = band.color;
        if (band.synthetic) div.classList.add("tl-synthetic");
        div.title = `${band.state === "on" ? "on-CPU" : "off-CPU"}`;
        bandCell.append(div);
      }
    }
    const open = (mode: "aggregated" | "chronological") => {
      void openFlamePane(session, row.tid, "walltime", mode, row.label);
    };
    labelCell.addEventListener("contextmenu", (ev) => {
      ev.preventDefault();
      showRowMenu(ev, session, row, open);
    });
    bandCell.addEventListener("dblclick", () => open("aggregated"));
    table.append(labelCell, bandCell);
  }
  const legend = el("div", "legend");
  legend.append(swatch(ON_CPU_RED, "on-CPU"), swatch(OFF_CPU_BLUE, "off-CPU"));
  legend.append(el("span", "hint", "right-click a thread for analyses"));
  main.append(legend, table);
}

function swatch(color: string, label: string): HTMLElement {
  const wrap = el("span", "swatch-wrap");
  const box = el("span", "swatch");
  box.style.background = color;
  wrap.append(box, el("span", undefined, label));
  return wrap;
}

function showRowMenu(
  ev: MouseEvent,
  session: string,
  row: TimelineRow,
  open: (mode: "aggregated" | "chronological") => void,
): void {
  closeMenus();
  const menu = el("div", "context-menu");
  menu.style.left = `${ev.pageX}px`;
  menu.style.top = `${ev.pageY}px`;
  const add = (label: string, fn: () => void) => {
    const item = el("button", "menu-item", label);
    item.addEventListener("click", () => {
      closeMenus();
      fn();
    });
    menu.append(item);
  };
  add("Flame graph (hot and cold)", () => open("aggregated"));
  add("Flame chart (chronological)", () => open("chronological"));
  if (row.hasSpawnStack) {
    add("Spawning stack trace", () => void openSpawnStack(session, row));
  }
  document.body.append(menu);
}

function closeMenus(): void {
  document.querySelectorAll(".context-menu").forEach((m) => m.remove());
}

document.addEventListener("click", closeMenus);

// ---------------------------------------------------------------- panes

function paneShell(
  title: string,
  onClose?: () => void,
): { pane: HTMLElement; body: HTMLElement } {
  const pane = el("section", "pane");
  const header = el("header", "pane-header");
  header.append(el("span", "pane-title", title));
  const close = el("button", "pane-close", "x");
  header.append(close);
  const body = el("div", "pane-body");
  pane.append(header, body);
  byId("panes").prepend(pane);
  close.addEventListener("click", () => {
    pane.remove();
    onClose?.();
  });
  return { pane, body };
}

async function openSpawnStack(session: string, row: TimelineRow): Promise<void> {
  const { body } = paneShell(`spawn stack: ${row.label}`);
  try {
    const stack = await client.spawnstack(session, row.tid);
    const list = el("ol", "stack-list");
    for (const frame of stack.frames) {
      const where =
        frame.file !== null ? ` (${frame.file}:${frame.line ?? "?"})` : "";
      list.append(el("li", "stack-frame", `${frame.function}${where}`));
    }
    body.append(list);
    const target = spawnHighlight(stack);
    if (target) {
      const btn = el("button", "link-btn",
        `open ${target.file} at line ${target.line}`);
      btn.addEventListener("click", () =>
        void openSourcePane(session, target.file, [], target.line));
      body.append(btn);
    }
  } catch (err) {
    showError(body, err);
  }
}

async function openFlamePane(
  session: string,
  tid: number,
  metric: string,
  mode: "aggregated" | "chronological",
  label: string,
): Promise<void> {
  const pane = state.openPane(session, tid, metric, mode);
  const { body } = paneShell(`${label} (tid ${tid})`, () =>
    state.closePane(pane.id));
  const toolbar = el("div", "pane-toolbar");
  const modeBtn = el("button", "mode-btn",
    mode === "aggregated" ? "chronological" : "aggregated");
  const searchBox = el("input", "search-box") as HTMLInputElement;
  searchBox.placeholder = "search (regex)";
  const badge = el("span", "search-badge", "");
  const crumbs = el("span", "crumbs", "");
  toolbar.append(modeBtn, searchBox, badge, crumbs);
  const canvas = el("canvas", "flame-canvas") as HTMLCanvasElement;
  canvas.width = 960;
  body.append(toolbar, canvas);

  modeBtn.addEventListener("click", () => {
    pane.mode = pane.mode === "aggregated" ? "chronological" : "aggregated";
    modeBtn.textContent =
      pane.mode === "aggregated" ? "chronological" : "aggregated";
    void draw();
  });
  searchBox.addEventListener("change", () => {
    pane.search = searchBox.value;
    void draw();
  });
  canvas.addEventListener("click", (ev) => {
    const layout = current;
    if (!layout || pane.mode !== "aggregated") return;
    const rect = pick(ev, layout);
    if (rect && rect.path.length > 0) {
      state.zoomIn(pane, rect.path);
      void draw();
    }
  });
  canvas.addEventListener("contextmenu", (ev) => {
    ev.preventDefault();
    const layout = current;
    if (!layout || pane.mode !== "aggregated") return;
    const rect = pick(ev, layout);
    if (rect && root) {
      const node = nodeAt(root, rect.path);
      if (node && node.file !== null) {
        void openSourcePane(
          session,
          node.file,
          Object.entries(node.lines).map(([l, v]) => [Number(l), v]),
          null,
        );
      }
    }
  });

  let root: FlameNode | null = null;
  let current: FlameLayout | null = null;

  const pick = (ev: MouseEvent, layout: FlameLayout) => {
    const bounds = canvas.getBoundingClientRect();
    const xFrac = (ev.clientX - bounds.left) / bounds.width;
    const depth = Math.floor((ev.clientY - bounds.top) / FLAME_ROW);
    return hitTest(layout, xFrac, depth);
  };

  const draw = async () => {
    const generation = state.bump(pane);
    try {
      if (pane.mode === "chronological") {
        const chron = await client.chron(session, tid);
        if (!state.isCurrent(pane, generation)) return;
        drawChron(canvas, chron);
        badge.textContent = "";
        crumbs.textContent = "";
        return;
      }
      root = await client.flame(session, tid, pane.metric);
      let highlighted: (path: string[]) => boolean = () => false;
      if (pane.search) {
        try {
          const result = await client.search(session, tid, pane.metric, pane.search);
          badge.textContent = searchBadgeText(result);
          badge.classList.remove("badge-error");
          highlighted = highlightTest(result.matches);
        } catch (err) {
          badge.textContent =
            err instanceof ApiRequestError ? err.errorCode : "error";
          badge.classList.add("badge-error");
        }
      } else {
        badge.textContent = "";
      }
      if (!state.isCurrent(pane, generation)) return;
      const zoom = state.currentZoom(pane);
      current = layoutFlame(root, zoom, highlighted);
      drawFlame(canvas, current);
      renderCrumbs(crumbs, pane, zoom, draw);
    } catch (err) {
      if (state.isCurrent(pane, generation)) showError(body, err);
    }
  };
  await draw();
}

function renderCrumbs(
  target: HTMLElement,
  pane: Pane,
  zoom: string[],
  redraw: () => Promise<void>,
): void {
  target.replaceChildren();
  const rootBtn = el("button", "crumb", "(all)");
  rootBtn.addEventListener("click", () => {
    state.zoomTo(pane, 0);
    void redraw();
  });
  target.append(rootBtn);
  zoom.forEach((name, i) => {
    target.append(el("span", "crumb-sep", "/"));
    const btn = el("button", "crumb", name);
    btn.addEventListener("click", () => {
      state.zoomTo(pane, 0);
      state.zoomIn(pane, zoom.slice(0, i + 1));
      void redraw();
    });
    target.append(btn);
  });
}

function drawFlame(canvas: HTMLCanvasElement, layout: FlameLayout): void {
  canvas.height = Math.max(1, layout.rowCount) * FLAME_ROW;
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.font = "12px sans-serif";
  for (const rect of layout.rects) {
    const x = rect.x * canvas.width;
    const w = Math.max(rect.width * canvas.width - 0.5, 0.5);
    const y = rect.depth * FLAME_ROW;
    ctx.fillStyle = rect.highlighted ? HIGHLIGHT : rect.color;
    ctx.fillRect(x, y, w, FLAME_ROW - 1);
    if (w > 40) {
      ctx.fillStyle = "#1b1b23";
      const pct = `${(rect.fractionOfView * 100).toFixed(1)}%`;
      ctx.fillText(`${rect.name}  ${pct}`, x + 3, y + FLAME_ROW - 6, w - 6);
    }
  }
}

function drawChron(canvas: HTMLCanvasElement, chron: Parameters<typeof layoutChron>[0]): void {
  const [start, end] = chronBounds(chron);
  canvas.height = 3 * FLAME_ROW;
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.font = "12px sans-serif";
  for (const rect of layoutChron(chron, start, end, canvas.width)) {
    const y = rect.lane * FLAME_ROW;
    const w = Math.max(rect.x1 - rect.x0, 1);
    ctx.fillStyle = rect.color;
    ctx.fillRect(rect.x0, y, w, FLAME_ROW - 1);
    if (w > 50) {
      ctx.fillStyle = "#1b1b23";
      ctx.fillText(rect.label, rect.x0 + 3, y + FLAME_ROW - 6, w - 6);
    }
  }
  ctx.fillStyle = "#555";
  ctx.fillText(`${end - start} ns`, 4, 3 * FLAME_ROW - 6);
}

// ---------------------------------------------------------------- source

async function openSourcePane(
  session: string,
  file: string,
  lineValues: [number, number][],
  highlightLine: number | null,
): Promise<void> {
  const { body } = paneShell(`code preview: ${file}`);
  try {
    const source = await client.source(session, file);
    const rows = annotateSource(source, lineValues, highlightLine);
    const pre = el("div", "source-view");
    for (const row of rows) {
      const line = el("div", "source-line");
      if (row.highlighted) line.classList.add("source-highlight");
      if (row.heat > 0) {
        line.style.background = `rgba(217, 79, 66, ${row.heat.toFixed(3)})`;
      }
      line.append(el("span", "source-no", String(row.lineNo)));
      line.append(el("span", "source-val",
        row.value === null ? "" : String(row.value)));
      line.append(el("span", "source-text", row.text || " "));
      pre.append(line);
    }
    body.append(pre);
    const target = pre.querySelector(".source-highlight");
    if (target) target.scrollIntoView({ block: "center" });
  } catch (err) {
    if (err instanceof ApiRequestError && err.status === 404) {
      body.append(el("p", "hint",
        "source not available (start the analyser with --source-root)"));
    } else {
      showError(body, err);
    }
  }
}

// ---------------------------------------------------------------- roofline

async function renderGeneralAnalyses(session: string): Promise<void> {
  const host = byId("general");
  host.replaceChildren();
  const roofline = await client.roofline(session);
  const entries = generalAnalyses(roofline);
  if (entries.length === 0) return; // menu item hidden without data
  const button = el("button", "general-btn", "General analyses *");
  const menu = el("div", "general-menu");
  menu.hidden = true;
  for (const entry of entries) {
    const item = el("button", "menu-item", entry);
    item.addEventListener("click", () => {
      menu.hidden = true;
      if (entry === ROOFLINE_MENU_LABEL && roofline) openRoofline(roofline);
    });
    menu.append(item);
  }
  button.addEventListener("click", () => {
    menu.hidden = !menu.hidden;
  });
  host.append(button, menu);
}

function openRoofline(data: NonNullable<Awaited<ReturnType<Client["roofline"]>>>): void {
  const { body } = paneShell(`roofline: ${data.machine}`);
  const plot = rooflineSeries(data);
  const width = 640;
  const height = 400;
  const svgNS = "http://www.w3.org/2000/svg";
  const svg = document.createElementNS(svgNS, "svg");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("class", "roofline-svg");
  for (const series of plot.series) {
    const [a, b] = series.points;
    const [x1, y1] = toSvgPoint(a, plot, width, height);
    const [x2, y2] = toSvgPoint(b, plot, width, height);
    const line = document.createElementNS(svgNS, "line");
    line.setAttribute("x1", String(x1));
    line.setAttribute("y1", String(y1));
    line.setAttribute("x2", String(x2));
    line.setAttribute("y2", String(y2));
    line.setAttribute("class", `roof-${series.kind}`);
    svg.append(line);
    const text = document.createElementNS(svgNS, "text");
    const lx = series.kind === "compute" ? x1 + 6 : (x1 + x2) / 2;
    const ly = series.kind === "compute" ? y1 - 6 : (y1 + y2) / 2 - 8;
    text.setAttribute("x", String(lx));
    text.setAttribute("y", String(Math.max(12, ly)));
    text.setAttribute("class", "roof-label");
    text.textContent = series.label;
    svg.append(text);
  }
  const axis = document.createElementNS(svgNS, "text");
  axis.setAttribute("x", "6");
  axis.setAttribute("y", String(height - 6));
  axis.setAttribute("class", "roof-axis");
  axis.textContent = "operational intensity (ops/byte, log) vs performance (ops/s, log)";
  svg.append(axis);
  body.append(svg);
}

void boot();
