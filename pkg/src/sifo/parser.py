"""Concrete syntax: `.sifo` source files, `.lat` lattice configs and `.ifbc`
refinement scripts.

The source surface is Java-like: `class C implements I { low imm int f; ... }`
with method bodies written as statement blocks that desugar to the expression
forms (Seq/Decl/If/While). The parser recovers per declaration and reports
diagnostics with 1-based source spans.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from sifo.lattice import LatticeError, SecurityLattice, build_lattice
from sifo.syntax import (
    Call, ClassDecl, Decl, Declassify, Expression, FieldAccess, FieldAssign,
    FieldDecl, Hole, If, Literal, MethodDef, MethodHeader, Modifier, New, Seq,
    SifoType, Var, While,
)

MODIFIER_NAMES = {m.value for m in Modifier}
KEYWORDS = {
    "class", "interface", "implements", "extends", "method", "new", "return",
    "if", "else", "while", "declassify", "true", "false", "unit",
} | MODIFIER_NAMES

RULE_NAMES = (
    "Variable", "Literal", "FieldAssignment", "FieldAccess", "MethodCall",
    "Constructor", "Composition", "Selection", "Repetition", "Subsumption",
    "SecurityPromotion", "ModifierPromotion", "Declassification", "LocalDecl",
)


@dataclass(frozen=True)
class SourceSpan:
    file: str
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def __str__(self) -> str:
        return f"{self.file}:{self.start_line}:{self.start_col}"


@dataclass(frozen=True)
class Diagnostic:
    span: SourceSpan
    message: str

    def __str__(self) -> str:
        return f"{self.span}: SyntaxError: {self.message}"


class ParseError(Exception):
    def __init__(self, span: SourceSpan, message: str):
        super().__init__(f"{span}: {message}")
        self.span = span
        self.message = message


class UnknownRuleError(ParseError):
    pass


# ---------------------------------------------------------------------------
# Tokenizer

_TOKEN_RE = re.compile(
    r"""
      (?P<ws>\s+)
    | (?P<comment>//[^\n]*|\#[^\n]*)
    | (?P<num>\d+)
    | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<str>"[^"\n]*")
    | (?P<op>==|!=|<=|>=|&&|\|\||->|[{}();,.=<>+\-*@:\[\]])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # num | id | str | op | eof
    text: str
    line: int
    col: int

    def span(self, file: str) -> SourceSpan:
        return SourceSpan(file, self.line, self.col, self.line,
                          self.col + max(len(self.text), 1))


def tokenize(text: str, file: str) -> list[Token]:
    tokens: list[Token] = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(SourceSpan(file, line, col, line, col + 1),
                             f"unexpected character {text[pos]!r}")
        kind = m.lastgroup
        lexeme = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, lexeme, line, col))
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            col = len(lexeme) - lexeme.rfind("\n")
        else:
            col += len(lexeme)
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


class _Cursor:
    def __init__(self, tokens: list[Token], file: str):
        self.tokens = tokens
        self.file = file
        self.i = 0

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def next(self) -> Token:
        t = self.peek()
        if t.kind != "eof":
            self.i += 1
        return t

    def at(self, text: str) -> bool:
        return self.peek().text == text and self.peek().kind in ("id", "op")

    def accept(self, text: str) -> Optional[Token]:
        if self.at(text):
            return self.next()
        return None

    def expect(self, text: str) -> Token:
        t = self.peek()
        if not self.at(text):
            raise ParseError(t.span(self.file),
                             f"expected '{text}', found '{t.text or '<eof>'}'")
        return self.next()

    def expect_id(self, what: str = "identifier") -> Token:
        t = self.peek()
        if t.kind != "id" or t.text in KEYWORDS - {"unit"}:
            raise ParseError(t.span(self.file), f"expected {what}, found '{t.text or '<eof>'}'")
        return self.next()

    def error(self, message: str) -> ParseError:
        return ParseError(self.peek().span(self.file), message)


# ---------------------------------------------------------------------------
# Program parsing

@dataclass
class ProgramFragment:
    declarations: list[ClassDecl] = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list)


def parse_program(text: str, file: str = "<input>") -> ProgramFragment:
    out = ProgramFragment()
    try:
        cur = _Cursor(tokenize(text, file), file)
    except ParseError as err:
        out.diagnostics.append(Diagnostic(err.span, err.message))
        return out
    while cur.peek().kind != "eof":
        try:
            out.declarations.append(_parse_class_decl(cur))
        except ParseError as err:
            out.diagnostics.append(Diagnostic(err.span, err.message))
            _skip_to_next_decl(cur)
    return out


def _skip_to_next_decl(cur: _Cursor) -> None:
    depth = 0
    while cur.peek().kind != "eof":
        t = cur.next()
        if t.text == "{":
            depth += 1
        elif t.text == "}":
            depth -= 1
            if depth <= 0:
                return


def _parse_class_decl(cur: _Cursor) -> ClassDecl:
    decl_tok = cur.peek()
    if cur.accept("class"):
        kind = "class"
        link = "implements"
    elif cur.accept("interface"):
        kind = "interface"
        link = "extends"
    else:
        raise cur.error("expected 'class' or 'interface'")
    name = cur.expect_id("class name").text
    supers: list[str] = []
    if cur.accept(link):
        supers.append(cur.expect_id().text)
        while cur.accept(","):
            supers.append(cur.expect_id().text)
    cur.expect("{")
    fields: list[FieldDecl] = []
    methods: list[MethodDef] = []
    headers: list[MethodHeader] = []
    while not cur.at("}"):
        level = cur.expect_id("security level").text
        mdf = _expect_modifier(cur)
        if cur.at("method"):
            member_tok = cur.peek()
            header = _parse_method_header(cur, level, mdf)
            if kind == "interface":
                cur.expect(";")
                headers.append(header)
            else:
                body = _parse_block(cur)
                methods.append(MethodDef(header, body,
                                         span=member_tok.span(cur.file)))
        else:
            ftype_class = cur.expect_id("class name").text
            fname = cur.expect_id("field name").text
            cur.expect(";")
            fields.append(FieldDecl(SifoType(level, mdf, ftype_class), fname))
    cur.expect("}")
    return ClassDecl(kind=kind, name=name, supers=tuple(supers),
                     fields=tuple(fields), methods=tuple(methods),
                     method_headers=tuple(headers),
                     span=decl_tok.span(cur.file))


def _expect_modifier(cur: _Cursor) -> Modifier:
    t = cur.peek()
    if t.kind != "id" or t.text not in MODIFIER_NAMES:
        raise ParseError(t.span(cur.file),
                         f"expected type modifier, found '{t.text or '<eof>'}'")
    cur.next()
    return Modifier(t.text)


def _parse_type(cur: _Cursor) -> SifoType:
    level = cur.expect_id("security level").text
    mdf = _expect_modifier(cur)
    cls = cur.expect_id("class name").text
    return SifoType(level, mdf, cls)


def _parse_method_header(cur: _Cursor, level: str, mdf: Modifier) -> MethodHeader:
    cur.expect("method")
    ret = _parse_type(cur)
    name = cur.expect_id("method name").text
    cur.expect("(")
    params: list[tuple[str, SifoType]] = []
    if not cur.at(")"):
        while True:
            ptype = _parse_type(cur)
            pname = cur.expect_id("parameter name").text
            params.append((pname, ptype))
            if not cur.accept(","):
                break
    cur.expect(")")
    return MethodHeader(level, mdf, ret, name, tuple(params))


def _parse_block(cur: _Cursor) -> Expression:
    cur.expect("{")
    body = _parse_statements(cur)
    cur.expect("}")
    return body


def _is_type_ahead(cur: _Cursor) -> bool:
    # `<level> <mdf> <Class> <name>` starts a local declaration.
    return (cur.peek().kind == "id"
            and cur.peek(1).kind == "id"
            and cur.peek(1).text in MODIFIER_NAMES)


def _parse_statements(cur: _Cursor) -> Expression:
    stmts: list[Expression] = []
    while not cur.at("}"):
        if cur.accept("return"):
            e = _parse_expr(cur)
            if not cur.accept(";") and not cur.at("}"):
                raise cur.error("expected ';'")
            stmts.append(e)
            break
        if _is_type_ahead(cur):
            t = _parse_type(cur)
            name = cur.expect_id("variable name").text
            cur.expect("=")
            init = _parse_expr(cur)
            cur.expect(";")
            rest = _parse_statements(cur)
            stmts.append(Decl(t, name, init, rest))
            break
        if cur.at("if"):
            stmts.append(_parse_if(cur))
            continue
        if cur.at("while"):
            cur.next()
            cur.expect("(")
            guard = _parse_expr(cur)
            cur.expect(")")
            body = _parse_block(cur)
            stmts.append(While(guard, body))
            continue
        e = _parse_expr(cur)
        if not cur.accept(";") and not cur.at("}"):
            raise cur.error("expected ';'")
        stmts.append(e)
    if not stmts:
        raise cur.error("empty method body")
    out = stmts[-1]
    for s in reversed(stmts[:-1]):
        out = Seq(s, out)
    return out


def _parse_if(cur: _Cursor) -> Expression:
    cur.expect("if")
    cur.expect("(")
    guard = _parse_expr(cur)
    cur.expect(")")
    then = _parse_block(cur)
    cur.expect("else")
    orelse = _parse_block(cur)
    return If(guard, then, orelse)


_BINARY_OPS = ("==", "!=", "<=", ">=", "<", ">", "+", "-", "*", "&&", "||")


def _parse_expr(cur: _Cursor) -> Expression:
    left = _parse_postfix(cur)
    for op in _BINARY_OPS:
        if cur.at(op):
            cur.next()
            right = _parse_expr(cur)
            return Call(left, op, (right,))
    if cur.at("="):
        if not isinstance(left, FieldAccess):
            raise cur.error("only fields can be assigned")
        cur.next()
        value = _parse_expr(cur)
        return FieldAssign(left.recv, left.field, value)
    return left


def _parse_postfix(cur: _Cursor) -> Expression:
    e = _parse_primary(cur)
    while cur.accept("."):
        name = cur.expect_id("member name").text
        if cur.accept("("):
            args: list[Expression] = []
            if not cur.at(")"):
                while True:
                    args.append(_parse_expr(cur))
                    if not cur.accept(","):
                        break
            cur.expect(")")
            e = Call(e, name, tuple(args))
        else:
            e = FieldAccess(e, name)
    return e


def _parse_primary(cur: _Cursor) -> Expression:
    t = cur.peek()
    if cur.accept("("):
        e = _parse_expr(cur)
        cur.expect(")")
        return e
    if cur.accept("new"):
        level = cur.expect_id("security level").text
        cls = cur.expect_id("class name").text
        cur.expect("(")
        args: list[Expression] = []
        if not cur.at(")"):
            while True:
                args.append(_parse_expr(cur))
                if not cur.accept(","):
                    break
        cur.expect(")")
        return New(level, cls, tuple(args))
    if cur.accept("declassify"):
        cur.expect("(")
        e = _parse_expr(cur)
        cur.expect(")")
        return Declassify(e)
    if cur.at("if"):
        return _parse_if(cur)
    if t.kind == "num":
        cur.next()
        return Literal("int", int(t.text))
    if t.kind == "str":
        cur.next()
        return Literal("String", t.text[1:-1])
    if cur.accept("true"):
        return Literal("Boolean", True)
    if cur.accept("false"):
        return Literal("Boolean", False)
    if cur.accept("unit"):
        return Literal("void", None)
    if t.kind == "id" and t.text == "this":
        cur.next()
        return Var("this")
    if t.kind == "id" and t.text not in KEYWORDS:
        cur.next()
        return Var(t.text)
    raise cur.error(f"expected expression, found '{t.text or '<eof>'}'")


# ---------------------------------------------------------------------------
# Lattice config

def parse_lattice(text: str, file: str = "<lattice>") -> SecurityLattice:
    """`level <name>` and `flow <lower> -> <upper>` lines; '#' comments."""
    levels: list[str] = []
    edges: list[tuple[str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        span = SourceSpan(file, lineno, 1, lineno, len(raw) + 1)
        parts = line.split()
        if parts[0] == "level" and len(parts) == 2:
            levels.append(parts[1])
        elif parts[0] == "flow" and len(parts) == 4 and parts[2] == "->":
            edges.append((parts[1], parts[3]))
        else:
            raise ParseError(span, f"cannot parse lattice line: {line!r}")
    try:
        return build_lattice(levels, edges)
    except LatticeError as err:
        raise ParseError(SourceSpan(file, 1, 1, 1, 1), str(err)) from err


# ---------------------------------------------------------------------------
# Refinement scripts

@dataclass(frozen=True)
class ScriptStep:
    rule: str
    hole_id: str
    args: tuple[str, ...]
    span: SourceSpan


@dataclass(frozen=True)
class RefinementScript:
    steps: tuple[ScriptStep, ...]


def parse_script(text: str, file: str = "<script>") -> RefinementScript:
    """One step per line: `<rule> @ <holeId> [<args>...]`; '#' comments."""
    steps: list[ScriptStep] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        span = SourceSpan(file, lineno, 1, lineno, len(raw) + 1)
        parts = line.split()
        if len(parts) < 3 or parts[1] != "@":
            raise ParseError(span, f"cannot parse step line: {line!r}")
        rule, hole_id = parts[0], parts[2]
        if rule not in RULE_NAMES:
            raise UnknownRuleError(span, f"unknown refinement rule '{rule}'")
        steps.append(ScriptStep(rule, hole_id, tuple(parts[3:]), span))
    return RefinementScript(tuple(steps))


# ---------------------------------------------------------------------------
# Pretty printing (inverse of the program grammar)

def pretty_type(t: SifoType) -> str:
    return str(t)


def pretty_expr(e: Expression) -> str:
    match e:
        case Var(name):
            return name
        case Literal(kind, value):
            if kind == "Boolean":
                return "true" if value else "false"
            if kind == "String":
                return f'"{value}"'
            if kind == "void":
                return "unit"
            return str(value)
        case FieldAccess(recv, f):
            return f"{pretty_expr(recv)}.{f}"
        case FieldAssign(recv, f, value):
            return f"{pretty_expr(recv)}.{f} = {pretty_expr(value)}"
        case Call(recv, m, args):
            if m in _BINARY_OPS and len(args) == 1:
                return f"{pretty_expr(recv)} {m} {pretty_expr(args[0])}"
            return f"{pretty_expr(recv)}.{m}({', '.join(pretty_expr(a) for a in args)})"
        case New(level, cls, args):
            return f"new {level} {cls}({', '.join(pretty_expr(a) for a in args)})"
        case Declassify(inner):
            return f"declassify({pretty_expr(inner)})"
        case Hole(id=h):
            return f"<{h}>"
    raise ValueError(f"not an atomic expression: {e!r}")


def pretty_body(e: Expression, indent: int = 1) -> list[str]:
    """Statement lines of a method body (no surrounding braces)."""
    pad = "  " * indent
    match e:
        case Seq(first, second):
            return pretty_body(first, indent) + pretty_body(second, indent)
        case Decl(t, name, init, rest):
            if isinstance(init, If):
                init_txt = _pretty_if_inline(init, indent)
            else:
                init_txt = pretty_expr(init)
            return [f"{pad}{pretty_type(t)} {name} = {init_txt};"] + pretty_body(rest, indent)
        case If():
            return _pretty_if_lines(e, indent)
        case While(guard, body):
            lines = [f"{pad}while ({pretty_expr(guard)}) {{"]
            lines += pretty_body(body, indent + 1)
            lines.append(f"{pad}}}")
            return lines
        case _:
            return [f"{pad}{pretty_expr(e)};"]


def _pretty_if_lines(e: If, indent: int) -> list[str]:
    pad = "  " * indent
    lines = [f"{pad}if ({pretty_expr(e.guard)}) {{"]
    lines += pretty_body(e.then, indent + 1)
    lines.append(f"{pad}}} else {{")
    lines += pretty_body(e.orelse, indent + 1)
    lines.append(f"{pad}}}")
    return lines


def _pretty_if_inline(e: If, indent: int) -> str:
    # Single-expression branches render inline: if (g) { a } else { b }
    def flat(x: Expression) -> str:
        return pretty_expr(x)
    return f"if ({pretty_expr(e.guard)}) {{ {flat(e.then)} }} else {{ {flat(e.orelse)} }}"


def pretty_method(class_name: str, md: MethodDef) -> str:
    h = md.header
    params = ", ".join(f"{pretty_type(t)} {n}" for n, t in h.params)
    lines = [f"{h.receiver_level} {h.receiver_modifier} method "
             f"{pretty_type(h.return_type)} {h.name}({params}) {{"]
    lines += pretty_body(md.body)
    lines.append("}")
    return "\n".join(lines)


def pretty_class(d: ClassDecl) -> str:
    link = "implements" if d.kind == "class" else "extends"
    head = f"{d.kind} {d.name}"
    if d.supers:
        head += f" {link} {', '.join(d.supers)}"
    lines = [head + " {"]
    for f in d.fields:
        lines.append(f"  {pretty_type(f.type)} {f.name};")
    if d.kind == "interface":
        for h in d.method_headers:
            params = ", ".join(f"{pretty_type(t)} {n}" for n, t in h.params)
            lines.append(f"  {h.receiver_level} {h.receiver_modifier} method "
                         f"{pretty_type(h.return_type)} {h.name}({params});")
    else:
        for m in d.methods:
            body = pretty_method(d.name, m)
            lines += ["  " + ln for ln in body.splitlines()]
    lines.append("}")
    return "\n".join(lines)


def pretty_program(decls: list[ClassDecl]) -> str:
    return "\n\n".join(pretty_class(d) for d in decls) + "\n"
