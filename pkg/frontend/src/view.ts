import {
  ContextRow,
  ExprNode,
  HoleView,
  SessionSnapshot,
  typeText,
} from './types';

// Render model. Everything here is a pure function of one session snapshot
// plus the local hole selection; no protocol state is invented client-side.

export interface TreeNode {
  /** Position id, following the hole naming scheme (eA, eA1, eA2, ...). */
  pathId: string;
  label: string;
  holeId?: string;
  /** Refinements applied at this position, e.g. "Ref(3) SecurityPromotion". */
  refs: string[];
  children: TreeNode[];
}

export interface ContextPanelRow extends ContextRow {
  /** True when this binding is seen as mut by some other open hole:
   *  it was demoted to read for this one by a guard restriction. */
  restricted: boolean;
}

export interface SessionView {
  title: string;
  revision: number;
  status: string;
  root: TreeNode;
  holes: HoleView[];
  selectedHole?: string;
  contextRows: ContextPanelRow[];
  requiredText: string;
  refinements: string[];
  exportEnabled: boolean;
}

export function exprText(e: ExprNode): string {
  switch (e.kind) {
    case 'hole':
      return `<${e.id}>`;
    case 'var':
      return e.name;
    case 'literal':
      if (e.class === 'Boolean') return e.value ? 'true' : 'false';
      if (e.class === 'String') return `"${e.value}"`;
      if (e.class === 'void') return 'unit';
      return String(e.value);
    case 'fieldAccess':
      return `${exprText(e.recv)}.${e.field}`;
    case 'fieldAssign':
      return `${exprText(e.recv)}.${e.field} = ${exprText(e.value)}`;
    case 'call':
      return `${exprText(e.recv)}.${e.method}(${e.args.map(exprText).join(', ')})`;
    case 'new':
      return `new ${e.level} ${e.class}(${e.args.map(exprText).join(', ')})`;
    case 'seq':
      return `${exprText(e.first)}; ${exprText(e.second)}`;
    case 'if':
      return `if (${exprText(e.guard)}) { ${exprText(e.then)} } else { ${exprText(e.else)} }`;
    case 'while':
      return `while (${exprText(e.guard)}) { ${exprText(e.body)} }`;
    case 'declassify':
      return `declassify(${exprText(e.inner)})`;
    case 'decl':
      return `${typeText(e.type)} ${e.name} = ${exprText(e.init)}; ${exprText(e.rest)}`;
  }
}

function childNodes(e: ExprNode): ExprNode[] {
  // Order matches the hole numbering of the refinement rules.
  switch (e.kind) {
    case 'fieldAssign':
      return [e.recv, e.value];
    case 'fieldAccess':
      return [e.recv];
    case 'call':
      return [e.recv, ...e.args];
    case 'new':
      return e.args;
    case 'seq':
      return [e.first, e.second];
    case 'if':
      return [e.guard, e.then, e.else];
    case 'while':
      return [e.guard, e.body];
    case 'declassify':
      return [e.inner];
    case 'decl':
      return [e.init, e.rest];
    default:
      return [];
  }
}

function nodeLabel(e: ExprNode, holes: Map<string, HoleView>): string {
  if (e.kind === 'hole') {
    const spec = holes.get(e.id);
    return spec ? `${e.id} : [Γ; ${typeText(spec.required)}]` : `<${e.id}>`;
  }
  switch (e.kind) {
    case 'seq':
      return ';';
    case 'if':
      return 'if';
    case 'while':
      return 'while';
    case 'decl':
      return `${typeText(e.type)} ${e.name} = …`;
    case 'fieldAssign':
      return `…${'.'}${e.field} = …`;
    case 'fieldAccess':
      return `…${'.'}${e.field}`;
    case 'call':
      return `…${'.'}${e.method}(…)`;
    case 'new':
      return `new ${e.level} ${e.class}(…)`;
    case 'declassify':
      return 'declassify';
    default:
      return exprText(e);
  }
}

export function buildTree(snapshot: SessionSnapshot): TreeNode {
  const holes = new Map(snapshot.holes.map((h) => [h.id, h]));
  const refsByHole = new Map<string, string[]>();
  snapshot.log.forEach((entry, index) => {
    const label = `Ref(${index + 1}) ${entry.rule}`;
    const existing = refsByHole.get(entry.hole) ?? [];
    refsByHole.set(entry.hole, [...existing, label]);
  });

  const walk = (e: ExprNode, pathId: string): TreeNode => ({
    pathId,
    label: nodeLabel(e, holes),
    holeId: e.kind === 'hole' ? e.id : undefined,
    refs: refsByHole.get(pathId) ?? [],
    children: childNodes(e).map((c, i) => walk(c, `${pathId}${i + 1}`)),
  });
  return walk(snapshot.tree, 'eA');
}

export function contextPanel(
  snapshot: SessionSnapshot,
  holeId: string,
): ContextPanelRow[] {
  const hole = snapshot.holes.find((h) => h.id === holeId);
  if (!hole) return [];
  const mutElsewhere = new Set<string>();
  for (const other of snapshot.holes) {
    if (other.id === holeId) continue;
    for (const row of other.context) {
      if (row.modifier === 'mut') mutElsewhere.add(row.name);
    }
  }
  return hole.context.map((row) => ({
    ...row,
    restricted: row.modifier === 'read' && mutElsewhere.has(row.name),
  }));
}

export function renderSession(
  snapshot: SessionSnapshot,
  selectedHole?: string,
): SessionView {
  const selection =
    selectedHole && snapshot.holes.some((h) => h.id === selectedHole)
      ? selectedHole
      : snapshot.holes[0]?.id;
  const hole = snapshot.holes.find((h) => h.id === selection);
  return {
    title: `${snapshot.class}.${snapshot.method}`,
    revision: snapshot.revision,
    status: snapshot.status,
    root: buildTree(snapshot),
    holes: snapshot.holes,
    selectedHole: selection,
    contextRows: selection ? contextPanel(snapshot, selection) : [],
    requiredText: hole ? typeText(hole.required) : '',
    refinements: snapshot.log.map(
      (entry, index) => `Ref(${index + 1}) ${entry.rule} @ ${entry.hole}`,
    ),
    exportEnabled: snapshot.status === 'complete',
  };
}

/** Plain-text tree rendering, used by tests and as a debugging aid. */
export function treeToText(node: TreeNode, indent = 0): string {
  const pad = '  '.repeat(indent);
  const refs = node.refs.length ? ` [${node.refs.join(', ')}]` : '';
  const lines = [`${pad}${node.label}${refs}`];
  for (const child of node.children) {
    lines.push(treeToText(child, indent + 1));
  }
  return lines.join('\n');
}
