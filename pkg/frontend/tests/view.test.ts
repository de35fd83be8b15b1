import { readFileSync } from 'node:fs';
import { describe, expect, it } from 'vitest';

import { SessionSnapshot } from '../src/types';
import {
  TreeNode,
  buildTree,
  contextPanel,
  exprText,
  renderSession,
  treeToText,
} from '../src/view';

function fixture(name: string): SessionSnapshot {
  const url = new URL(`./fixtures/${name}.json`, import.meta.url);
  return JSON.parse(readFileSync(url, 'utf8')) as SessionSnapshot;
}

function findNode(node: TreeNode, pathId: string): TreeNode | undefined {
  if (node.pathId === pathId) return node;
  for (const child of node.children) {
    const hit = findNode(child, pathId);
    if (hit) return hit;
  }
  return undefined;
}

describe('renderSession', () => {
  it('renders a fresh session as a single labeled hole', () => {
    const view = renderSession(fixture('setnumber-fresh'));
    expect(view.title).toBe('Card.setNumber');
    expect(view.revision).toBe(0);
    expect(view.root.children).toHaveLength(0);
    expect(view.root.label).toBe('eA : [Γ; low imm void]');
    expect(view.selectedHole).toBe('eA');
    expect(view.requiredText).toBe('low imm void');
    expect(view.exportEnabled).toBe(false);
  });

  it('enables export on a completed session with zero holes', () => {
    const view = renderSession(fixture('setnumber-complete'));
    expect(view.status).toBe('complete');
    expect(view.holes).toHaveLength(0);
    expect(view.exportEnabled).toBe(true);
    expect(view.selectedHole).toBeUndefined();
  });

  it('keeps an explicit selection when that hole is still open', () => {
    const snap = fixture('signature-after-selection');
    expect(renderSession(snap, 'eA2212').selectedHole).toBe('eA2212');
    expect(renderSession(snap, 'gone').selectedHole).toBe(snap.holes[0].id);
  });

  it('numbers refinements in application order', () => {
    const view = renderSession(fixture('signature-after-selection'));
    expect(view.refinements).toHaveLength(8);
    expect(view.refinements[0]).toBe('Ref(1) LocalDecl @ eA');
    expect(view.refinements[7]).toBe('Ref(8) Selection @ eA221');
  });
});

describe('buildTree', () => {
  it('labels refined positions with Ref(n) and the rule name', () => {
    const root = buildTree(fixture('signature-after-selection'));
    expect(root.refs).toEqual(['Ref(1) LocalDecl']);
    const selection = findNode(root, 'eA221');
    expect(selection?.label).toBe('if');
    expect(selection?.refs).toEqual(['Ref(8) Selection']);
    // guard and both branch holes hang off the if node
    expect(selection?.children.map((c) => c.holeId)).toEqual([
      'eA2211',
      'eA2212',
      'eA2213',
    ]);
  });

  it('collects repeated refinements of one position in order', () => {
    const snap = fixture('setnumber-complete');
    const root = buildTree(snap);
    expect(root.refs).toEqual(['Ref(1) FieldAssignment']);
    expect(findNode(root, 'eA1')?.refs).toEqual(['Ref(2) Variable']);
    expect(findNode(root, 'eA2')?.refs).toEqual(['Ref(3) Variable']);
    expect(treeToText(root)).toContain('Ref(1) FieldAssignment');
  });
});

describe('contextPanel', () => {
  it('flags guard-restricted bindings in branch holes', () => {
    const snap = fixture('signature-after-selection');
    const branch = contextPanel(snap, 'eA2212');
    const byName = Object.fromEntries(branch.map((r) => [r.name, r]));
    expect(byName['client'].modifier).toBe('read');
    expect(byName['client'].restricted).toBe(true);
    expect(byName['email'].restricted).toBe(true);
    expect(byName['pubkey'].modifier).toBe('imm');
    expect(byName['pubkey'].restricted).toBe(false);
  });

  it('does not flag the guard hole, which keeps the full context', () => {
    const snap = fixture('signature-after-selection');
    const guard = contextPanel(snap, 'eA2211');
    for (const row of guard) {
      expect(row.restricted).toBe(false);
    }
    const byName = Object.fromEntries(guard.map((r) => [r.name, r.modifier]));
    expect(byName['client']).toBe('mut');
    expect(byName['email']).toBe('mut');
  });

  it('returns an empty panel for an unknown hole', () => {
    expect(contextPanel(fixture('setnumber-fresh'), 'nope')).toEqual([]);
  });
});

describe('exprText', () => {
  it('prints literals, assignments and conditionals', () => {
    const snap = fixture('setnumber-complete');
    expect(exprText(snap.tree)).toBe('this.number = x');
    expect(exprText({ kind: 'literal', class: 'Boolean', value: true })).toBe('true');
    expect(exprText({ kind: 'literal', class: 'void', value: null })).toBe('unit');
    expect(
      exprText({
        kind: 'if',
        guard: { kind: 'var', name: 'g' },
        then: { kind: 'literal', class: 'int', value: 1 },
        else: { kind: 'hole', id: 'h2' },
      }),
    ).toBe('if (g) { 1 } else { <h2> }');
  });
});
