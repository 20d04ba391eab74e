// Minimal hash router.  Pages register a renderer; navigation rewrites
// location.hash and re-renders into the shared outlet.  Renderers may return
// a cleanup callback (used by the allocations page to stop its poll timer).

export type Cleanup = () => void;
export type PageRenderer = (outlet: HTMLElement) => Cleanup | void;

interface RouterOptions {
  outlet: HTMLElement;
  isAuthed: () => boolean;
  loginPath: string;
  homePath: string;
  onRender?: (path: string) => void;
}

const routes = new Map<string, PageRenderer>();
let options: RouterOptions | null = null;
let activeCleanup: Cleanup | null = null;
let renderedHash: string | null = null;

export function defineRoute(path: string, renderer: PageRenderer): void {
  routes.set(path, renderer);
}

export function currentPath(): string {
  const hash = window.location.hash;
  if (!hash || hash === "#") return "/";
  return hash.startsWith("#") ? hash.slice(1) : hash;
}

export function navigate(path: string): void {
  window.location.hash = `#${path}`;
  renderCurrent();
}

export function startRouter(opts: RouterOptions): void {
  options = opts;
  renderedHash = null;
  window.addEventListener("hashchange", () => renderCurrent());
  renderCurrent();
}

function resolvePath(): string {
  if (!options) throw new Error("router not started");
  let path = currentPath();
  if (!routes.has(path)) {
    path = options.homePath;
  }
  if (!options.isAuthed() && path !== options.loginPath) {
    return options.loginPath;
  }
  if (options.isAuthed() && path === options.loginPath) {
    return options.homePath;
  }
  return path;
}

export function renderCurrent(force = false): void {
  if (!options) return;
  const path = resolvePath();
  const targetHash = `#${path}`;
  if (window.location.hash !== targetHash) {
    window.location.hash = targetHash;
  }
  if (!force && renderedHash === targetHash) {
    return;
  }
  renderedHash = targetHash;
  if (activeCleanup) {
    activeCleanup();
    activeCleanup = null;
  }
  const renderer = routes.get(path);
  if (!renderer) return;
  const outlet = options.outlet;
  while (outlet.firstChild) outlet.removeChild(outlet.firstChild);
  const cleanup = renderer(outlet);
  activeCleanup = typeof cleanup === "function" ? cleanup : null;
  options.onRender?.(path);
}
