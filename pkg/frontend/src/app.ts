import { ProtocolError, SifoClient } from './client';
import { SessionSnapshot, StepCandidate } from './types';
import { ContextPanelRow, TreeNode, renderSession } from './view';

// DOM shell. All state lives in `snapshot` (last acknowledged server
// response) plus the local hole selection; every mutation goes through the
// client and re-renders from the response.

interface AppState {
  client: SifoClient;
  snapshot?: SessionSnapshot;
  selectedHole?: string;
  candidates: StepCandidate[];
  error?: string;
}

const state: AppState = {
  client: new SifoClient(inferBaseUrl()),
  candidates: [],
};

function inferBaseUrl(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get('service') ?? window.location.origin;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function renderTree(node: TreeNode, container: HTMLElement): void {
  const item = el('div', 'tree-node');
  const label = el(
    'span',
    node.holeId ? 'tree-label hole' : 'tree-label',
    node.label,
  );
  if (node.refs.length) {
    label.append(el('span', 'ref-label', ` ${node.refs.join(', ')}`));
  }
  if (node.holeId) {
    const hole = node.holeId;
    label.addEventListener('click', () => selectHole(hole));
    if (hole === state.selectedHole) label.classList.add('selected');
  }
  item.append(label);
  const kids = el('div', 'tree-children');
  for (const child of node.children) renderTree(child, kids);
  item.append(kids);
  container.append(item);
}

function renderContext(rows: ContextPanelRow[], container: HTMLElement): void {
  const table = el('table', 'context');
  const head = el('tr');
  for (const h of ['name', 'level', 'modifier', 'class', '']) {
    head.append(el('th', undefined, h));
  }
  table.append(head);
  for (const row of rows) {
    const tr = el('tr', row.restricted ? 'restricted' : undefined);
    tr.append(el('td', undefined, row.name));
    tr.append(el('td', undefined, row.level));
    tr.append(el('td', undefined, row.modifier));
    tr.append(el('td', undefined, row.class));
    tr.append(el('td', 'flag', row.restricted ? 'restricted to read' : ''));
    table.append(tr);
  }
  container.append(table);
}

async function selectHole(holeId: string): Promise<void> {
  state.selectedHole = holeId;
  state.candidates = [];
  if (state.snapshot) {
    try {
      state.candidates = await state.client.applicableRules(
        state.snapshot.id,
        holeId,
      );
      state.error = undefined;
    } catch (err) {
      state.error = describeError(err);
    }
  }
  render();
}

function describeError(err: unknown): string {
  if (err instanceof ProtocolError) {
    // Show the violated rule and premise verbatim; no client rewording.
    const rule = err.detail.rule ? `${err.detail.rule}: ` : '';
    return `${err.detail.error}: ${rule}${err.detail.message}`;
  }
  return String(err);
}

async function applyCandidate(candidate: StepCandidate): Promise<void> {
  if (!state.snapshot) return;
  try {
    state.snapshot = await state.client.applyStepWithRetry(
      state.snapshot.id,
      state.snapshot.revision,
      candidate.line,
    );
    state.error = undefined;
    state.candidates = [];
  } catch (err) {
    state.error = describeError(err);
  }
  render();
}

async function undoStep(): Promise<void> {
  if (!state.snapshot) return;
  try {
    state.snapshot = await state.client.undo(
      state.snapshot.id,
      state.snapshot.revision,
    );
    state.error = undefined;
    state.candidates = [];
  } catch (err) {
    state.error = describeError(err);
  }
  render();
}

async function exportMethod(): Promise<void> {
  if (!state.snapshot) return;
  try {
    const text = await state.client.exportMethod(state.snapshot.id);
    const pane = document.getElementById('export');
    if (pane) pane.textContent = text;
  } catch (err) {
    state.error = describeError(err);
    render();
  }
}

function render(): void {
  const root = document.getElementById('app');
  if (!root || !state.snapshot) return;
  root.replaceChildren();
  const view = renderSession(state.snapshot, state.selectedHole);
  state.selectedHole = view.selectedHole;

  const header = el('header');
  header.append(el('h1', undefined, view.title));
  header.append(
    el('span', 'meta', `revision ${view.revision} · ${view.status}`),
  );
  const undoBtn = el('button', undefined, 'Undo');
  undoBtn.addEventListener('click', undoStep);
  undoBtn.disabled = view.revision === 0;
  header.append(undoBtn);
  const exportBtn = el('button', undefined, 'Export');
  exportBtn.addEventListener('click', exportMethod);
  exportBtn.disabled = !view.exportEnabled;
  header.append(exportBtn);
  root.append(header);

  if (state.error) {
    root.append(el('div', 'error', state.error));
  }

  const columns = el('div', 'columns');
  const treePane = el('section', 'pane tree-pane');
  treePane.append(el('h2', undefined, 'Refinement tree'));
  renderTree(view.root, treePane);
  columns.append(treePane);

  const holePane = el('section', 'pane hole-pane');
  holePane.append(el('h2', undefined, `Hole ${view.selectedHole ?? '-'}`));
  if (view.selectedHole) {
    holePane.append(el('div', 'required', `required: ${view.requiredText}`));
    renderContext(view.contextRows, holePane);
  }
  columns.append(holePane);

  const rulePane = el('section', 'pane rule-pane');
  rulePane.append(el('h2', undefined, 'Applicable rules'));
  for (const candidate of state.candidates) {
    const btn = el('button', 'rule', candidate.line);
    btn.addEventListener('click', () => applyCandidate(candidate));
    rulePane.append(btn);
  }
  columns.append(rulePane);

  root.append(columns);
  root.append(el('pre', 'log', view.refinements.join('\n')));
}

async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const sessionId = params.get('session');
  if (sessionId) {
    state.snapshot = await state.client.getSession(sessionId);
  } else {
    const methods = await state.client.listMethods();
    const target = methods[0];
    if (!target) throw new Error('workspace has no constructible methods');
    state.snapshot = await state.client.createSession(
      target.class,
      target.method,
    );
  }
  state.selectedHole = state.snapshot.holes[0]?.id;
  render();
  if (state.selectedHole) await selectHole(state.selectedHole);
}

if (typeof document !== 'undefined' && document.getElementById('app')) {
  boot().catch((err) => {
    const root = document.getElementById('app');
    if (root) root.textContent = describeError(err);
  });
}
