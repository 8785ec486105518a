import { Prediction, WhatIfResult } from "./types.js";
import { allColumnsIdentical } from "./state.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className = "",
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

export function formatPercent(p: number): string {
  return `${(100 * p).toFixed(1)}%`;
}

/** Ranked probability bars plus the verbatim explanation rows.
 * The service already sorts the distribution; ties keep its order. */
export function renderPrediction(container: HTMLElement, prediction: Prediction): void {
  container.replaceChildren();
  const bars = el("div", "bars");
  for (const entry of prediction.distribution) {
    const row = el("div", "bar-row");
    row.dataset.class = entry.class;
    const label = el("span", "bar-label", entry.class);
    const track = el("div", "bar-track");
    const fill = el("div", "bar-fill");
    fill.style.width = `${(100 * entry.p).toFixed(1)}%`;
    track.appendChild(fill);
    const pct = el("span", "bar-pct", formatPercent(entry.p));
    row.append(label, track, pct);
    bars.appendChild(row);
  }
  container.appendChild(bars);

  const panel = el("div", "explanation");
  panel.appendChild(el("h3", "", "why"));
  const list = el("ul");
  for (const line of prediction.explanation) {
    list.appendChild(el("li", "explanation-line", line));
  }
  panel.appendChild(list);
  container.appendChild(panel);
}

export interface WhatIfHandlers {
  onPick(value: string): void;
}

/** Side-by-side columns, one per varied value; the winning class cell of
 * each column is highlighted, and picking a column feeds the form. */
export function renderWhatIf(
  container: HTMLElement,
  result: WhatIfResult,
  handlers: WhatIfHandlers,
): void {
  container.replaceChildren();
  const table = el("table", "whatif-table");
  const head = el("tr");
  head.appendChild(el("th", "", "class"));
  for (const row of result.rows) {
    const th = el("th", "whatif-column", row.value);
    th.dataset.value = row.value;
    const button = el("button", "pick-column", `use ${row.value}`);
    button.addEventListener("click", () => handlers.onPick(row.value));
    th.appendChild(button);
    head.appendChild(th);
  }
  table.appendChild(head);

  const classes = result.rows[0]?.distribution.map((d) => d.class) ?? [];
  const byColumn = result.rows.map((row) => {
    const lookup = new Map(row.distribution.map((d) => [d.class, d.p]));
    const top = row.distribution[0]?.class;
    return { lookup, top };
  });
  for (const cls of classes) {
    const tr = el("tr");
    tr.appendChild(el("td", "whatif-class", cls));
    byColumn.forEach((column, i) => {
      const p = column.lookup.get(cls) ?? 0;
      const td = el("td", column.top === cls ? "best" : "", formatPercent(p));
      td.dataset.value = result.rows[i].value;
      tr.appendChild(td);
    });
    table.appendChild(tr);
  }
  container.appendChild(table);

  if (allColumnsIdentical(result)) {
    container.appendChild(
      el("p", "whatif-note", "this attribute does not influence the model"),
    );
  }
}

export function renderError(container: HTMLElement, message: string): void {
  container.replaceChildren();
  if (message) {
    container.appendChild(el("p", "error", message));
  }
}
