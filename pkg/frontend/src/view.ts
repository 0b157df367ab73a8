import { Label } from './api.js';
import { AppState } from './controller.js';

export interface Handlers {
  onLogin: (annotatorId: string) => void;
  onPress: (label: Label) => void;
  onRetry: () => void;
}

const BUTTONS: Array<{ label: Label; key: string; text: string }> = [
  { label: 'paraphrase', key: 'P', text: 'paraphrase' },
  { label: 'not_paraphrase', key: 'N', text: 'not a paraphrase' },
  { label: 'skip', key: 'S', text: 'skip' },
];

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) {
    node.className = className;
  }
  return node;
}

function banner(doc: Document, message: string, handlers: Handlers): HTMLElement {
  const box = el(doc, 'div', 'banner');
  const text = el(doc, 'span');
  text.textContent = `connection problem: ${message}`;
  const retry = el(doc, 'button');
  retry.textContent = 'retry';
  retry.addEventListener('click', () => handlers.onRetry());
  box.append(text, retry);
  return box;
}

function loginScreen(doc: Document, handlers: Handlers, savedId: string): HTMLElement {
  const screen = el(doc, 'div', 'screen login');
  const heading = el(doc, 'h1');
  heading.textContent = 'parabench annotation';
  const form = el(doc, 'form');
  const input = el(doc, 'input');
  input.id = 'annotator';
  input.placeholder = 'annotator id';
  input.value = savedId;
  input.autofocus = true;
  const start = el(doc, 'button');
  start.type = 'submit';
  start.textContent = 'start';
  form.append(input, start);
  form.addEventListener('submit', (event) => {
    event.preventDefault();
    handlers.onLogin(input.value);
  });
  screen.append(heading, form);
  return screen;
}

function taskScreen(doc: Document, state: AppState, handlers: Handlers): HTMLElement {
  const screen = el(doc, 'div', 'screen task');

  const progress = el(doc, 'div', 'progress');
  progress.textContent = `${state.done} of ${state.total} judged`;
  screen.append(progress);

  // The pair text is inserted via textContent and never touched: what the
  // server sent is exactly what the annotator sees.
  const task = state.task;
  if (task !== null) {
    const source = el(doc, 'div', 'text source');
    source.lang = 'ml';
    source.textContent = task.source;
    const candidate = el(doc, 'div', 'text candidate');
    candidate.lang = 'ml';
    candidate.textContent = task.candidate;
    screen.append(source, candidate);
  }

  const row = el(doc, 'div', 'buttons');
  const busy = state.phase === 'submitting';
  for (const entry of BUTTONS) {
    const button = el(doc, 'button');
    button.dataset.label = entry.label;
    button.disabled = busy;
    const hint = el(doc, 'kbd');
    hint.textContent = entry.key;
    button.append(hint, doc.createTextNode(` ${entry.text}`));
    button.addEventListener('click', () => handlers.onPress(entry.label));
    row.append(button);
  }
  screen.append(row);

  if (state.toast !== null) {
    const toast = el(doc, 'div', 'toast');
    toast.textContent = state.toast;
    screen.append(toast);
  }
  return screen;
}

function doneScreen(doc: Document, state: AppState): HTMLElement {
  const screen = el(doc, 'div', 'screen done');
  const heading = el(doc, 'h1');
  heading.textContent = 'all done';
  const detail = el(doc, 'p');
  detail.textContent = `You have judged every pair assigned to you (${state.done} in total).`;
  screen.append(heading, detail);
  return screen;
}

export function render(root: HTMLElement, state: AppState, handlers: Handlers, savedId = ''): void {
  const doc = root.ownerDocument;
  root.replaceChildren();

  if (state.banner !== null) {
    root.append(banner(doc, state.banner, handlers));
  }

  switch (state.phase) {
    case 'login':
      root.append(loginScreen(doc, handlers, savedId));
      break;
    case 'loading': {
      const note = el(doc, 'div', 'screen loading');
      note.textContent = 'loading next pair…';
      root.append(note);
      break;
    }
    case 'task':
    case 'submitting':
      root.append(taskScreen(doc, state, handlers));
      break;
    case 'done':
      root.append(doneScreen(doc, state));
      break;
  }
}
