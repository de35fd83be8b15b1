// Wire types of the refinement service. The UI never re-derives any of this;
// every level, modifier and message shown on screen comes verbatim from
// these payloads.

export interface TypeRef {
  level: string;
  modifier: string;
  class: string;
}

export interface ContextRow extends TypeRef {
  name: string;
}

export interface HoleView {
  id: string;
  context: ContextRow[];
  required: TypeRef;
  pre: string;
  post: string;
}

export type ExprNode =
  | { kind: 'hole'; id: string }
  | { kind: 'var'; name: string }
  | { kind: 'literal'; class: string; value: unknown }
  | { kind: 'fieldAccess'; field: string; recv: ExprNode }
  | { kind: 'fieldAssign'; field: string; recv: ExprNode; value: ExprNode }
  | { kind: 'call'; method: string; recv: ExprNode; args: ExprNode[] }
  | { kind: 'new'; level: string; class: string; args: ExprNode[] }
  | { kind: 'seq'; first: ExprNode; second: ExprNode }
  | { kind: 'if'; guard: ExprNode; then: ExprNode; else: ExprNode }
  | { kind: 'while'; guard: ExprNode; body: ExprNode }
  | { kind: 'declassify'; inner: ExprNode }
  | { kind: 'decl'; type: TypeRef; name: string; init: ExprNode; rest: ExprNode };

export interface LogEntry {
  rule: string;
  hole: string;
  line: string;
}

export interface SessionSnapshot {
  id: string;
  class: string;
  method: string;
  revision: number;
  status: 'in-progress' | 'complete';
  tree: ExprNode;
  holes: HoleView[];
  log: LogEntry[];
}

export interface StepCandidate {
  rule: string;
  hole: string;
  line: string;
  name?: string;
  level?: string;
  type?: TypeRef;
  signature?: string;
  literal?: string;
}

export interface Diagnostic {
  code: string;
  rule: string;
  message: string;
  span: string | null;
}

export interface VerifyResult {
  ok: boolean;
  diagnostics: Diagnostic[];
}

export interface MethodRef {
  class: string;
  method: string;
}

/** Error detail exactly as the server sent it. */
export interface ErrorDetail {
  error: string;
  message: string;
  rule?: string;
  openHoles?: string[];
}

export function typeText(t: TypeRef): string {
  return `${t.level} ${t.modifier} ${t.class}`;
}
