export const ACTION_LABELS = [
  "engagement",
  "value proposition",
  "technical detail",
  "closing",
];

/** Four horizontal bars, widths proportional to the [0,1] action values. */
export function renderActionBars(action: number[]): HTMLElement {
  const wrap = document.createElement("div");
  wrap.className = "action-bars";
  action.forEach((value, i) => {
    const row = document.createElement("div");
    row.className = "bar-row";

    const label = document.createElement("span");
    label.className = "bar-label";
    label.textContent = ACTION_LABELS[i] ?? `component ${i}`;

    const track = document.createElement("div");
    track.className = "bar-track";
    const fill = document.createElement("div");
    fill.className = "bar-fill";
    fill.style.width = `${Math.round(value * 10000) / 100}%`;
    fill.title = value.toFixed(3);
    track.appendChild(fill);

    const amount = document.createElement("span");
    amount.className = "bar-value";
    amount.textContent = value.toFixed(2);

    row.append(label, track, amount);
    wrap.appendChild(row);
  });
  return wrap;
}
