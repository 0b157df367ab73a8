import { Label } from './api.js';
import { Controller } from './controller.js';

const KEY_LABELS: Record<string, Label> = {
  p: 'paraphrase',
  n: 'not_paraphrase',
  s: 'skip',
};

/**
 * Global hotkeys for judging: P, N, S. Held-key repeats and chorded
 * presses are ignored, as are keystrokes aimed at a text field. The
 * controller drops presses while a request is in flight, so mashing a
 * key cannot double-submit.
 */
export function installHotkeys(target: EventTarget, controller: Controller): () => void {
  const onKeydown = (event: Event): void => {
    const e = event as KeyboardEvent;
    if (e.repeat || e.ctrlKey || e.metaKey || e.altKey) {
      return;
    }
    const focus = e.target as HTMLElement | null;
    if (focus && (focus.tagName === 'INPUT' || focus.tagName === 'TEXTAREA')) {
      return;
    }
    const label = KEY_LABELS[e.key.toLowerCase()];
    if (label !== undefined) {
      void controller.press(label);
    }
  };
  target.addEventListener('keydown', onKeydown);
  return () => target.removeEventListener('keydown', onKeydown);
}
