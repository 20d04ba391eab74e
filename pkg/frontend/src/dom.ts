// DOM construction helpers shared by the pages.

type Attrs = Record<string, string | boolean | EventListener>;
type Child = Node | string | null | undefined;

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Attrs = {},
  ...children: Child[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (typeof value === "function") {
      node.addEventListener(key.replace(/^on/, ""), value);
    } else if (typeof value === "boolean") {
      if (value) {
        node.setAttribute(key, "");
      }
      // checked/disabled etc. must also land on the property
      if (key in node) {
        (node as unknown as Record<string, unknown>)[key] = value;
      }
    } else {
      node.setAttribute(key, value);
    }
  }
  for (const child of children) {
    if (child === null || child === undefined) continue;
    node.append(child instanceof Node ? child : document.createTextNode(child));
  }
  return node;
}

export function clear(node: Element): void {
  while (node.firstChild) {
    node.removeChild(node.firstChild);
  }
}

/** Runs an async action with the button disabled until it settles. */
export async function withBusy(
  button: HTMLButtonElement,
  action: () => Promise<void>,
): Promise<void> {
  if (button.disabled) return;
  button.disabled = true;
  try {
    await action();
  } finally {
    button.disabled = false;
  }
}

const seqCounters = new Map<string, number>();

/**
 * Returns a "still current" probe for last-write-wins rendering: each call
 * bumps the sequence for the key, and the probe reports whether a newer
 * request has started since.  Stale responses skip their render step.
 */
export function beginRequest(key: string): () => boolean {
  const seq = (seqCounters.get(key) ?? 0) + 1;
  seqCounters.set(key, seq);
  return () => seqCounters.get(key) === seq;
}
