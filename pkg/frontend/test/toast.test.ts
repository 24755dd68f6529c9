import { afterEach, describe, expect, it, vi } from "vitest";

import { showToast } from "../src/toast.js";

afterEach(() => {
  document.body.innerHTML = "";
  vi.useRealTimers();
});

describe("toasts", () => {
  it("appends a message to the shared container", () => {
    const toast = showToast("conflict: already decided");
    expect(toast.textContent).toBe("conflict: already decided");
    expect(toast.className).toContain("toast-error");
    expect(document.getElementById("toasts")?.children).toHaveLength(1);
  });

  it("stacks and expires", () => {
    vi.useFakeTimers();
    showToast("one", "info", 1000);
    showToast("two", "error", 5000);
    const container = document.getElementById("toasts")!;
    expect(container.children).toHaveLength(2);
    vi.advanceTimersByTime(1500);
    expect(container.children).toHaveLength(1);
    expect(container.children[0]!.textContent).toBe("two");
    vi.advanceTimersByTime(5000);
    expect(container.children).toHaveLength(0);
  });
});
