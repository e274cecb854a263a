import { describe, expect, it } from "vitest";

import { renderCandidateTable } from "../src/candidates";
import type { Candidate } from "../src/types";

function candidate(text: string, score: number, temperature = 0.7): Candidate {
  return { text, temperature, features: [0, 0, 0, 0], score };
}

function rows(table: HTMLTableElement) {
  return [...table.querySelectorAll<HTMLTableRowElement>("tbody tr")];
}

describe("renderCandidateTable", () => {
  it("orders rows by score, best first", () => {
    const table = renderCandidateTable(
      [candidate("a", -0.9), candidate("b", -0.1), candidate("c", -0.5)],
      1,
    );
    expect(rows(table).map((r) => r.dataset.index)).toEqual(["1", "2", "0"]);
  });

  it("keeps the original order for tied scores", () => {
    const table = renderCandidateTable(
      [candidate("a", -0.5), candidate("b", -0.5), candidate("c", -0.5)],
      0,
    );
    expect(rows(table).map((r) => r.dataset.index)).toEqual(["0", "1", "2"]);
  });

  it("highlights the server's selected candidate even when sorting moves it", () => {
    const table = renderCandidateTable(
      [
        candidate("best score", -0.1),
        candidate("middling", -0.4),
        candidate("chosen by server", -0.7),
        candidate("worst", -0.9),
      ],
      2,
    );
    const highlighted = rows(table).filter((r) =>
      r.classList.contains("selected"),
    );
    expect(highlighted).toHaveLength(1);
    expect(highlighted[0]!.dataset.index).toBe("2");
    // sorting is untouched by the highlight
    expect(rows(table)[0]!.dataset.index).toBe("0");
  });

  it("renders one row per candidate with its reply text", () => {
    const table = renderCandidateTable(
      [candidate("hello there", -0.2), candidate("goodbye", -0.3)],
      0,
    );
    expect(rows(table)).toHaveLength(2);
    expect(table.textContent).toContain("hello there");
    expect(table.textContent).toContain("goodbye");
  });
});
