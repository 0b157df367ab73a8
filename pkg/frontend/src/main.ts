import { ApiClient, FetchLike, Label } from './api.js';
import { Controller } from './controller.js';
import { installHotkeys } from './keys.js';
import { Handlers, render } from './view.js';

const STORAGE_KEY = 'parabench.annotator';

export interface BootOptions {
  /** Service origin; empty string means same-origin. */
  base?: string;
  fetchFn?: FetchLike;
  win?: Window & typeof globalThis;
}

/** Wire the client together against a root element. Returns the controller. */
export function boot(root: HTMLElement, options: BootOptions = {}): Controller {
  const win = options.win ?? window;
  const api = new ApiClient(options.base ?? '', options.fetchFn);
  const controller = new Controller(api);

  const handlers: Handlers = {
    onLogin: (annotatorId: string) => {
      const id = annotatorId.trim();
      if (id) {
        win.localStorage.setItem(STORAGE_KEY, id);
      }
      void controller.login(id);
    },
    onPress: (label: Label) => void controller.press(label),
    onRetry: () => void controller.retry(),
  };

  const savedId = win.localStorage.getItem(STORAGE_KEY) ?? '';
  controller.subscribe((state) => render(root, state, handlers, savedId));
  installHotkeys(win, controller);
  return controller;
}

// Browser entry point; tests import boot() and supply their own root.
const appRoot = typeof document !== 'undefined' ? document.getElementById('app') : null;
if (appRoot) {
  boot(appRoot);
}
