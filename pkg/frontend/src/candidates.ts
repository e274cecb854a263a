import type { Candidate } from "./types.js";

/**
 * Candidate table sorted by score, best first. The highlighted row is the
 * one the server actually sent (selectedIndex refers to the candidate's
 * position in the reply, not to the sorted order).
 */
export function renderCandidateTable(
  candidates: Candidate[],
  selectedIndex: number,
): HTMLTableElement {
  const ranked = candidates
    .map((candidate, index) => ({ candidate, index }))
    .sort((a, b) => b.candidate.score - a.candidate.score);

  const table = document.createElement("table");
  table.className = "candidate-table";
  const head = table.createTHead().insertRow();
  for (const title of ["temp", "score", "reply"]) {
    const th = document.createElement("th");
    th.textContent = title;
    head.appendChild(th);
  }

  const body = table.createTBody();
  for (const { candidate, index } of ranked) {
    const row = body.insertRow();
    row.className = "candidate-row";
    row.dataset.index = String(index);
    if (index === selectedIndex) row.classList.add("selected");
    row.insertCell().textContent = candidate.temperature.toFixed(1);
    row.insertCell().textContent = candidate.score.toFixed(3);
    row.insertCell().textContent = candidate.text;
  }
  return table;
}
