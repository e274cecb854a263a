import { describe, expect, it } from "vitest";

import { ACTION_LABELS, renderActionBars } from "../src/bars";

function widths(el: HTMLElement): string[] {
  return [...el.querySelectorAll<HTMLElement>(".bar-fill")].map(
    (fill) => fill.style.width,
  );
}

describe("renderActionBars", () => {
  it("renders four zero-width bars for the zero action", () => {
    expect(widths(renderActionBars([0, 0, 0, 0]))).toEqual([
      "0%",
      "0%",
      "0%",
      "0%",
    ]);
  });

  it("renders four full bars for the all-ones action", () => {
    expect(widths(renderActionBars([1, 1, 1, 1]))).toEqual([
      "100%",
      "100%",
      "100%",
      "100%",
    ]);
  });

  it("renders widths proportional to the values", () => {
    expect(widths(renderActionBars([0.5, 0.25, 0.75, 0.1]))).toEqual([
      "50%",
      "25%",
      "75%",
      "10%",
    ]);
  });

  it("labels the bars with the four metric names", () => {
    const labels = [
      ...renderActionBars([0.2, 0.4, 0.6, 0.8]).querySelectorAll(".bar-label"),
    ].map((el) => el.textContent);
    expect(labels).toEqual(ACTION_LABELS);
  });
});
