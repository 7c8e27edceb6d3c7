/**
 * Story viewer: hydrates the JSON payload embedded in a served story page
 * into interactive widgets, and drives related-object navigation.
 *
 * Progressive enhancement: the server-rendered fallbacks stay in place
 * whenever the payload is missing, unparseable, or a widget throws.
 */

export type Row = Record<string, string>;

export interface SectionPayload {
  kind: string;
  rows?: Row[];
  text?: string;
}

export interface StorySection {
  id: string;
  heading: string;
  view: string;
  payload: SectionPayload;
  error?: string;
}

export interface StoryPayload {
  object: string;
  title: string;
  sections: StorySection[];
  provenance: { section: string; query: string }[];
}

export const THEME = {
  text: "#1A1A1A",
  background: "#FFFFFF",
  accent: "#00509E",
} as const;

// --- WCAG contrast ---------------------------------------------------------

export function relativeLuminance(hex: string): number {
  const raw = hex.replace("#", "");
  const channel = (i: number) => {
    const c = parseInt(raw.slice(i, i + 2), 16) / 255;
    return c <= 0.03928 ? c / 12.92 : Math.pow((c + 0.055) / 1.055, 2.4);
  };
  return 0.2126 * channel(0) + 0.7152 * channel(2) + 0.0722 * channel(4);
}

export function contrastRatio(a: string, b: string): number {
  const la = relativeLuminance(a);
  const lb = relativeLuminance(b);
  const [hi, lo] = la >= lb ? [la, lb] : [lb, la];
  return (hi + 0.05) / (lo + 0.05);
}

// --- chart model -----------------------------------------------------------

export interface ChartModel {
  bars: { label: string; value: number }[];
  axisMax: number;
  skipped: number;
}

export function buildChartModel(rows: Row[]): ChartModel {
  const bars: { label: string; value: number }[] = [];
  let skipped = 0;
  for (const row of rows) {
    const value = Number(row["value"]);
    if (!Number.isFinite(value) || value < 0 || row["value"] === undefined || row["value"] === "") {
      skipped += 1;
      continue;
    }
    bars.push({ label: row["label"] ?? "", value });
  }
  const axisMax = bars.reduce((m, b) => Math.max(m, b.value), 0);
  return { bars, axisMax, skipped };
}

// --- widget renderers ------------------------------------------------------

const SVG_NS = "http://www.w3.org/2000/svg";
const CHART_WIDTH = 360;
const BAR_HEIGHT = 20;
const BAR_GAP = 8;
const LABEL_WIDTH = 140;

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  text?: string,
  className?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (text !== undefined) node.textContent = text;
  if (className) node.className = className;
  return node;
}

export function renderBarChart(doc: Document, rows: Row[]): HTMLElement {
  const container = el(doc, "div", undefined, "story-widget story-chart");
  const model = buildChartModel(rows);
  if (model.bars.length === 0) {
    container.appendChild(
      el(doc, "p", "No chartable data in this section.", "story-empty"),
    );
    return container;
  }
  if (model.skipped > 0) {
    container.appendChild(
      el(doc, "p", `${model.skipped} row(s) without a numeric value were skipped.`, "story-notice"),
    );
  }
  const svg = doc.createElementNS(SVG_NS, "svg");
  const height = model.bars.length * (BAR_HEIGHT + BAR_GAP);
  svg.setAttribute("width", String(LABEL_WIDTH + CHART_WIDTH + 50));
  svg.setAttribute("height", String(height));
  svg.setAttribute("role", "img");
  model.bars.forEach((bar, i) => {
    const y = i * (BAR_HEIGHT + BAR_GAP);
    const length = model.axisMax === 0 ? 0 : (bar.value / model.axisMax) * CHART_WIDTH;
    const label = doc.createElementNS(SVG_NS, "text");
    label.setAttribute("x", "0");
    label.setAttribute("y", String(y + BAR_HEIGHT - 5));
    label.setAttribute("fill", THEME.text);
    label.textContent = bar.label;
    const rect = doc.createElementNS(SVG_NS, "rect");
    rect.setAttribute("x", String(LABEL_WIDTH));
    rect.setAttribute("y", String(y));
    rect.setAttribute("width", String(length));
    rect.setAttribute("height", String(BAR_HEIGHT));
    rect.setAttribute("fill", THEME.accent);
    const value = doc.createElementNS(SVG_NS, "text");
    value.setAttribute("x", String(LABEL_WIDTH + length + 6));
    value.setAttribute("y", String(y + BAR_HEIGHT - 5));
    value.setAttribute("fill", THEME.text);
    value.textContent = String(bar.value);
    svg.append(label, rect, value);
  });
  container.appendChild(svg);
  return container;
}

export function renderTable(doc: Document, rows: Row[], notice?: string): HTMLElement {
  const container = el(doc, "div", undefined, "story-widget story-table");
  if (notice) container.appendChild(el(doc, "p", notice, "story-notice"));
  if (rows.length === 0) {
    container.appendChild(el(doc, "p", "No data available for this section.", "story-empty"));
    return container;
  }
  const columns: string[] = [];
  for (const row of rows) {
    for (const key of Object.keys(row)) {
      if (!columns.includes(key)) columns.push(key);
    }
  }
  const table = el(doc, "table");
  const headRow = el(doc, "tr");
  for (const c of columns) headRow.appendChild(el(doc, "th", c));
  const thead = el(doc, "thead");
  thead.appendChild(headRow);
  const tbody = el(doc, "tbody");
  for (const row of rows) {
    const tr = el(doc, "tr");
    for (const c of columns) tr.appendChild(el(doc, "td", row[c] ?? ""));
    tbody.appendChild(tr);
  }
  table.append(thead, tbody);
  container.appendChild(table);
  return container;
}

export function renderFacts(doc: Document, rows: Row[]): HTMLElement {
  const container = el(doc, "div", undefined, "story-widget story-facts");
  if (rows.length === 0) {
    container.appendChild(el(doc, "p", "No data available for this section.", "story-empty"));
    return container;
  }
  const dl = el(doc, "dl");
  for (const row of rows) {
    dl.appendChild(el(doc, "dt", row["property"] ?? ""));
    dl.appendChild(el(doc, "dd", row["value"] ?? ""));
  }
  container.appendChild(dl);
  return container;
}

export function renderTimeline(doc: Document, rows: Row[]): HTMLElement {
  const container = el(doc, "div", undefined, "story-widget story-timeline");
  if (rows.length === 0) {
    container.appendChild(el(doc, "p", "No data available for this section.", "story-empty"));
    return container;
  }
  const list = el(doc, "ol");
  for (const row of rows) {
    list.appendChild(el(doc, "li", `${row["date"] ?? ""} — ${row["label"] ?? ""}`));
  }
  container.appendChild(list);
  return container;
}

export function renderImage(doc: Document, rows: Row[]): HTMLElement {
  const container = el(doc, "div", undefined, "story-widget story-image");
  for (const row of rows) {
    const img = el(doc, "img");
    img.setAttribute("src", row["src"] ?? "");
    img.setAttribute("alt", row["alt"] ?? "");
    container.appendChild(img);
  }
  if (rows.length === 0) {
    container.appendChild(el(doc, "p", "No data available for this section.", "story-empty"));
  }
  return container;
}

export function renderText(doc: Document, payload: SectionPayload): HTMLElement {
  const container = el(doc, "div", undefined, "story-widget story-text");
  container.appendChild(el(doc, "p", payload.text ?? ""));
  return container;
}

export function currentConfigId(win: Pick<Window, "location">): string {
  const params = new URLSearchParams(win.location.search);
  return params.get("config") ?? "default";
}

export interface NavigateOptions {
  fetchImpl?: typeof fetch;
  win?: Window;
}

/**
 * Loads the story page for another object with the current config.
 * On success the document is replaced and a history entry is pushed;
 * on a non-200 response the page is left unchanged and a notice shown.
 */
export async function navigateRelated(
  iri: string,
  configId: string,
  options: NavigateOptions = {},
): Promise<boolean> {
  const win = options.win ?? window;
  const doFetch = options.fetchImpl ?? win.fetch.bind(win);
  const url =
    `/story?object=${encodeURIComponent(iri)}&config=${encodeURIComponent(configId)}`;
  let response: Response;
  try {
    response = await doFetch(url, { headers: { Accept: "text/html" } });
  } catch (err) {
    showNotice(win.document, "Could not load the related story.");
    return false;
  }
  if (!response.ok) {
    showNotice(win.document, "Could not load the related story.");
    return false;
  }
  const html = await response.text();
  win.history.pushState({ object: iri, config: configId }, "", url);
  win.document.documentElement.innerHTML = html;
  hydrate(win.document, win);
  return true;
}

function showNotice(doc: Document, message: string): void {
  let notice = doc.querySelector(".story-nav-notice");
  if (!notice) {
    notice = el(doc, "p", undefined, "story-notice story-nav-notice");
    doc.body.appendChild(notice);
  }
  notice.textContent = message;
}

export function renderRelatedLinks(
  doc: Document,
  rows: Row[],
  configId: string,
  win?: Window,
): HTMLElement {
  const container = el(doc, "div", undefined, "story-widget story-related");
  if (rows.length === 0) {
    container.appendChild(el(doc, "p", "No data available for this section.", "story-empty"));
    return container;
  }
  const list = el(doc, "ul");
  for (const row of rows) {
    const iri = row["link"] ?? "";
    const item = el(doc, "li");
    const anchor = el(doc, "a", row["label"] || iri);
    anchor.setAttribute(
      "href",
      `/story?object=${encodeURIComponent(iri)}&config=${encodeURIComponent(configId)}`,
    );
    anchor.addEventListener("click", (event) => {
      event.preventDefault();
      void navigateRelated(iri, configId, win ? { win } : {});
    });
    item.appendChild(anchor);
    list.appendChild(item);
  }
  container.appendChild(list);
  return container;
}

// --- hydration -------------------------------------------------------------

export function parsePayload(doc: Document): StoryPayload | null {
  const holder = doc.getElementById("story-data");
  if (!holder || !holder.textContent) {
    console.warn("story viewer: no story-data element; leaving fallbacks in place");
    return null;
  }
  try {
    return JSON.parse(holder.textContent) as StoryPayload;
  } catch (err) {
    console.warn("story viewer: unparseable story-data payload", err);
    return null;
  }
}

export function renderSection(
  doc: Document,
  section: StorySection,
  configId: string,
  win?: Window,
): HTMLElement {
  const rows = section.payload.rows ?? [];
  switch (section.view) {
    case "facts":
      return renderFacts(doc, rows);
    case "table":
      return renderTable(doc, rows);
    case "map":
      return renderTable(
        doc, rows, "Map rendering is not yet supported; showing the data as a table.",
      );
    case "bar_chart":
      return renderBarChart(doc, rows);
    case "timeline":
      return renderTimeline(doc, rows);
    case "image":
      return renderImage(doc, rows);
    case "text":
      return renderText(doc, section.payload);
    case "related_links":
      return renderRelatedLinks(doc, rows, configId, win);
    default:
      return renderTable(
        doc, rows,
        `The "${section.view}" view is not supported by this viewer; showing the data as a table.`,
      );
  }
}

/**
 * Mounts a widget into every section of the page; returns how many were
 * mounted.  Errored sections keep their server-rendered notice, and a
 * renderer failure leaves that section's fallback untouched.
 */
export function hydrate(doc: Document, win?: Window): number {
  const payload = parsePayload(doc);
  if (!payload) return 0;
  const configId = currentConfigId(win ?? { location: { search: "" } as Location });
  let mounted = 0;
  for (const section of payload.sections) {
    const host = doc.getElementById(`section-${section.id}`);
    if (!host) continue;
    const fallback = host.querySelector(".story-fallback");
    if (!fallback) continue;
    if (section.error) continue; // keep the server-rendered error notice
    try {
      const widget = renderSection(doc, section, configId, win);
      fallback.replaceChildren(widget);
      mounted += 1;
    } catch (err) {
      console.warn(`story viewer: failed to hydrate section ${section.id}`, err);
    }
  }
  return mounted;
}

declare const process: unknown;

if (typeof document !== "undefined" && typeof process === "undefined") {
  if (document.readyState === "loading") {
    document.addEventListener("DOMContentLoaded", () => hydrate(document, window));
  } else {
    hydrate(document, window);
  }
}
