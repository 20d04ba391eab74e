// Shared DOM test utilities for driving the app under jsdom.

/** Lets queued promises and jsdom's async event dispatch settle. */
export async function flush(rounds = 5): Promise<void> {
  for (let i = 0; i < rounds; i++) {
    await new Promise((resolve) => setTimeout(resolve, 0));
  }
}

export function q<T extends Element>(selector: string): T {
  const node = document.querySelector<T>(selector);
  if (!node) {
    throw new Error(`expected element ${selector} to be on the page`);
  }
  return node;
}

export function qa<T extends Element>(selector: string): T[] {
  return [...document.querySelectorAll<T>(selector)];
}

export function fill(selector: string, value: string): void {
  q<HTMLInputElement>(selector).value = value;
}

export function submitForm(selector: string): void {
  q<HTMLFormElement>(selector).dispatchEvent(
    new Event("submit", { bubbles: true, cancelable: true }),
  );
}

export function clickNav(path: string): void {
  q<HTMLAnchorElement>(`a[href="#${path}"]`).click();
}

/** Ticks the checkbox whose wrapping label shows `labelText`. */
export function checkByLabel(name: string, labelText: string, checked = true): void {
  const box = qa<HTMLInputElement>(`input[name="${name}"]`).find(
    (input) => input.parentElement?.textContent?.trim() === labelText,
  );
  if (!box) {
    throw new Error(`no ${name} checkbox labelled ${labelText}`);
  }
  box.checked = checked;
}

export function rowByName(tableSelector: string, name: string): HTMLTableRowElement {
  return q<HTMLTableRowElement>(`${tableSelector} tr[data-name="${name}"]`);
}

export function texts(selector: string): string[] {
  return qa(selector).map((node) => node.textContent ?? "");
}
