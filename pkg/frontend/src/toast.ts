/** Transient corner notifications (conflict and error reporting). */

const CONTAINER_ID = "toasts";

function container(): HTMLElement {
  let el = document.getElementById(CONTAINER_ID);
  if (!el) {
    el = document.createElement("div");
    el.id = CONTAINER_ID;
    document.body.appendChild(el);
  }
  return el;
}

export function showToast(
  message: string,
  kind: "error" | "info" = "error",
  ttlMs = 4000,
): HTMLElement {
  const toast = document.createElement("div");
  toast.className = `toast toast-${kind}`;
  toast.textContent = message;
  container().appendChild(toast);
  setTimeout(() => toast.remove(), ttlMs);
  return toast;
}
