// Non-blocking popup notices, bottom-right corner, auto-dismiss.

const TOAST_LIFETIME_MS = 4000;

function container(): HTMLElement {
  let node = document.getElementById("toast-stack");
  if (!node) {
    node = document.createElement("div");
    node.id = "toast-stack";
    document.body.append(node);
  }
  return node;
}

export function showToast(message: string, kind: "success" | "error" = "success"): void {
  const note = document.createElement("div");
  note.className = `toast toast-${kind}`;
  note.setAttribute("role", "status");
  note.textContent = message;
  container().append(note);
  window.setTimeout(() => note.remove(), TOAST_LIFETIME_MS);
}

export function toastError(err: unknown, fallback = "something went wrong"): void {
  const message = err instanceof Error && err.message ? err.message : fallback;
  showToast(message, "error");
}
