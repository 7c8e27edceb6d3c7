"use strict";
(() => {
  // src/viewer.ts
  var THEME = {
    text: "#1A1A1A",
    background: "#FFFFFF",
    accent: "#00509E"
  };
  function relativeLuminance(hex) {
    const raw = hex.replace("#", "");
    const channel = (i) => {
      const c = parseInt(raw.slice(i, i + 2), 16) / 255;
      return c <= 0.03928 ? c / 12.92 : Math.pow((c + 0.055) / 1.055, 2.4);
    };
    return 0.2126 * channel(0) + 0.7152 * channel(2) + 0.0722 * channel(4);
  }
  function contrastRatio(a, b) {
    const la = relativeLuminance(a);
    const lb = relativeLuminance(b);
    const [hi, lo] = la >= lb ? [la, lb] : [lb, la];
    return (hi + 0.05) / (lo + 0.05);
  }
  function buildChartModel(rows) {
    var _a;
    const bars = [];
    let skipped = 0;
    for (const row of rows) {
      const value = Number(row["value"]);
      if (!Number.isFinite(value) || value < 0 || row["value"] === void 0 || row["value"] === "") {
        skipped += 1;
        continue;
      }
      bars.push({ label: (_a = row["label"]) != null ? _a : "", value });
    }
    const axisMax = bars.reduce((m, b) => Math.max(m, b.value), 0);
    return { bars, axisMax, skipped };
  }
  var SVG_NS = "http://www.w3.org/2000/svg";
  var CHART_WIDTH = 360;
  var BAR_HEIGHT = 20;
  var BAR_GAP = 8;
  var LABEL_WIDTH = 140;
  function el(doc, tag, text, className) {
    const node = doc.createElement(tag);
    if (text !== void 0) node.textContent = text;
    if (className) node.className = className;
    return node;
  }
  function renderBarChart(doc, rows) {
    const container = el(doc, "div", void 0, "story-widget story-chart");
    const model = buildChartModel(rows);
    if (model.bars.length === 0) {
      container.appendChild(
        el(doc, "p", "No chartable data in this section.", "story-empty")
      );
      return container;
    }
    if (model.skipped > 0) {
      container.appendChild(
        el(doc, "p", `${model.skipped} row(s) without a numeric value were skipped.`, "story-notice")
      );
    }
    const svg = doc.createElementNS(SVG_NS, "svg");
    const height = model.bars.length * (BAR_HEIGHT + BAR_GAP);
    svg.setAttribute("width", String(LABEL_WIDTH + CHART_WIDTH + 50));
    svg.setAttribute("height", String(height));
    svg.setAttribute("role", "img");
    model.bars.forEach((bar, i) => {
      const y = i * (BAR_HEIGHT + BAR_GAP);
      const length = model.axisMax === 0 ? 0 : bar.value / model.axisMax * CHART_WIDTH;
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
  function renderTable(doc, rows, notice) {
    var _a;
    const container = el(doc, "div", void 0, "story-widget story-table");
    if (notice) container.appendChild(el(doc, "p", notice, "story-notice"));
    if (rows.length === 0) {
      container.appendChild(el(doc, "p", "No data available for this section.", "story-empty"));
      return container;
    }
    const columns = [];
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
      for (const c of columns) tr.appendChild(el(doc, "td", (_a = row[c]) != null ? _a : ""));
      tbody.appendChild(tr);
    }
    table.append(thead, tbody);
    container.appendChild(table);
    return container;
  }
  function renderFacts(doc, rows) {
    var _a, _b;
    const container = el(doc, "div", void 0, "story-widget story-facts");
    if (rows.length === 0) {
      container.appendChild(el(doc, "p", "No data available for this section.", "story-empty"));
      return container;
    }
    const dl = el(doc, "dl");
    for (const row of rows) {
      dl.appendChild(el(doc, "dt", (_a = row["property"]) != null ? _a : ""));
      dl.appendChild(el(doc, "dd", (_b = row["value"]) != null ? _b : ""));
    }
    container.appendChild(dl);
    return container;
  }
  function renderTimeline(doc, rows) {
    var _a, _b;
    const container = el(doc, "div", void 0, "story-widget story-timeline");
    if (rows.length === 0) {
      container.appendChild(el(doc, "p", "No data available for this section.", "story-empty"));
      return container;
    }
    const list = el(doc, "ol");
    for (const row of rows) {
      list.appendChild(el(doc, "li", `${(_a = row["date"]) != null ? _a : ""} \u2014 ${(_b = row["label"]) != null ? _b : ""}`));
    }
    container.appendChild(list);
    return container;
  }
  function renderImage(doc, rows) {
    var _a, _b;
    const container = el(doc, "div", void 0, "story-widget story-image");
    for (const row of rows) {
      const img = el(doc, "img");
      img.setAttribute("src", (_a = row["src"]) != null ? _a : "");
      img.setAttribute("alt", (_b = row["alt"]) != null ? _b : "");
      container.appendChild(img);
    }
    if (rows.length === 0) {
      container.appendChild(el(doc, "p", "No data available for this section.", "story-empty"));
    }
    return container;
  }
  function renderText(doc, payload) {
    var _a;
    const container = el(doc, "div", void 0, "story-widget story-text");
    container.appendChild(el(doc, "p", (_a = payload.text) != null ? _a : ""));
    return container;
  }
  function currentConfigId(win) {
    var _a;
    const params = new URLSearchParams(win.location.search);
    return (_a = params.get("config")) != null ? _a : "default";
  }
  async function navigateRelated(iri, configId, options = {}) {
    var _a, _b;
    const win = (_a = options.win) != null ? _a : window;
    const doFetch = (_b = options.fetchImpl) != null ? _b : win.fetch.bind(win);
    const url = `/story?object=${encodeURIComponent(iri)}&config=${encodeURIComponent(configId)}`;
    let response;
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
  function showNotice(doc, message) {
    let notice = doc.querySelector(".story-nav-notice");
    if (!notice) {
      notice = el(doc, "p", void 0, "story-notice story-nav-notice");
      doc.body.appendChild(notice);
    }
    notice.textContent = message;
  }
  function renderRelatedLinks(doc, rows, configId, win) {
    var _a;
    const container = el(doc, "div", void 0, "story-widget story-related");
    if (rows.length === 0) {
      container.appendChild(el(doc, "p", "No data available for this section.", "story-empty"));
      return container;
    }
    const list = el(doc, "ul");
    for (const row of rows) {
      const iri = (_a = row["link"]) != null ? _a : "";
      const item = el(doc, "li");
      const anchor = el(doc, "a", row["label"] || iri);
      anchor.setAttribute(
        "href",
        `/story?object=${encodeURIComponent(iri)}&config=${encodeURIComponent(configId)}`
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
  function parsePayload(doc) {
    const holder = doc.getElementById("story-data");
    if (!holder || !holder.textContent) {
      console.warn("story viewer: no story-data element; leaving fallbacks in place");
      return null;
    }
    try {
      return JSON.parse(holder.textContent);
    } catch (err) {
      console.warn("story viewer: unparseable story-data payload", err);
      return null;
    }
  }
  function renderSection(doc, section, configId, win) {
    var _a;
    const rows = (_a = section.payload.rows) != null ? _a : [];
    switch (section.view) {
      case "facts":
        return renderFacts(doc, rows);
      case "table":
        return renderTable(doc, rows);
      case "map":
        return renderTable(
          doc,
          rows,
          "Map rendering is not yet supported; showing the data as a table."
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
          doc,
          rows,
          `The "${section.view}" view is not supported by this viewer; showing the data as a table.`
        );
    }
  }
  function hydrate(doc, win) {
    const payload = parsePayload(doc);
    if (!payload) return 0;
    const configId = currentConfigId(win != null ? win : { location: { search: "" } });
    let mounted = 0;
    for (const section of payload.sections) {
      const host = doc.getElementById(`section-${section.id}`);
      if (!host) continue;
      const fallback = host.querySelector(".story-fallback");
      if (!fallback) continue;
      if (section.error) continue;
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
  if (typeof document !== "undefined" && typeof process === "undefined") {
    if (document.readyState === "loading") {
      document.addEventListener("DOMContentLoaded", () => hydrate(document, window));
    } else {
      hydrate(document, window);
    }
  }
})();
