"""Abstract syntax shared by the checker and the refinement engine.

Types are triples (security level, modifier, class name). Expression trees may
contain typed holes; a hole-free tree is a finished method body. All values
here are immutable and safe to share across sessions.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterator, Optional, Union


class Modifier(str, Enum):
    MUT = "mut"
    IMM = "imm"
    CAPSULE = "capsule"
    READ = "read"

    def __str__(self) -> str:
        return self.value


def modifier_leq(a: Modifier, b: Modifier) -> bool:
    """Modifier subtyping: capsule below everything, read above everything."""
    return a == b or a == Modifier.CAPSULE or b == Modifier.READ


@dataclass(frozen=True)
class SifoType:
    level: str
    modifier: Modifier
    class_name: str

    def __str__(self) -> str:
        return f"{self.level} {self.modifier} {self.class_name}"

    def with_level(self, level: str) -> "SifoType":
        return replace(self, level=level)

    def with_modifier(self, modifier: Modifier) -> "SifoType":
        return replace(self, modifier=modifier)


@dataclass(frozen=True)
class FieldDecl:
    type: SifoType
    name: str


@dataclass(frozen=True)
class MethodHeader:
    receiver_level: str
    receiver_modifier: Modifier
    return_type: SifoType
    name: str
    params: tuple[tuple[str, SifoType], ...]

    def receiver_type(self, class_name: str) -> SifoType:
        return SifoType(self.receiver_level, self.receiver_modifier, class_name)

    def signature(self, class_name: str) -> "Signature":
        return Signature(
            receiver=self.receiver_type(class_name),
            params=tuple(t for _, t in self.params),
            ret=self.return_type,
        )


@dataclass(frozen=True)
class Signature:
    """A receiver/params/return triple as used for call-site matching."""

    receiver: SifoType
    params: tuple[SifoType, ...]
    ret: SifoType

    def __str__(self) -> str:
        ps = ", ".join(str(p) for p in self.params)
        return f"{self.receiver} ({ps}) -> {self.ret}"


# ---------------------------------------------------------------------------
# Expressions

@dataclass(frozen=True)
class Expression:
    pass


@dataclass(frozen=True)
class Hole(Expression):
    id: str


@dataclass(frozen=True)
class Var(Expression):
    name: str


@dataclass(frozen=True)
class Literal(Expression):
    kind: str  # "int" | "Boolean" | "String" | "void"
    value: object


@dataclass(frozen=True)
class FieldAccess(Expression):
    recv: Expression
    field: str


@dataclass(frozen=True)
class FieldAssign(Expression):
    recv: Expression
    field: str
    value: Expression


@dataclass(frozen=True)
class Call(Expression):
    recv: Expression
    method: str
    args: tuple[Expression, ...]


@dataclass(frozen=True)
class New(Expression):
    level: str
    class_name: str
    args: tuple[Expression, ...]


@dataclass(frozen=True)
class Seq(Expression):
    first: Expression
    second: Expression


@dataclass(frozen=True)
class If(Expression):
    guard: Expression
    then: Expression
    orelse: Expression


@dataclass(frozen=True)
class While(Expression):
    guard: Expression
    body: Expression


@dataclass(frozen=True)
class Declassify(Expression):
    inner: Expression


@dataclass(frozen=True)
class Decl(Expression):
    """Single-assignment local: `type name = init;` scoping over `rest`."""

    type: SifoType
    name: str
    init: Expression
    rest: Expression


def children(e: Expression) -> tuple[Expression, ...]:
    match e:
        case Hole() | Var() | Literal():
            return ()
        case FieldAccess(recv, _):
            return (recv,)
        case FieldAssign(recv, _, value):
            return (recv, value)
        case Call(recv, _, args):
            return (recv, *args)
        case New(_, _, args):
            return tuple(args)
        case Seq(first, second):
            return (first, second)
        case If(guard, then, orelse):
            return (guard, then, orelse)
        case While(guard, body):
            return (guard, body)
        case Declassify(inner):
            return (inner,)
        case Decl(_, _, init, rest):
            return (init, rest)
    raise TypeError(f"unknown expression {e!r}")


def holes(e: Expression) -> list[str]:
    """Hole ids left-to-right, outside-in. Empty iff the tree is fully refined."""
    out: list[str] = []

    def walk(node: Expression) -> None:
        if isinstance(node, Hole):
            out.append(node.id)
            return
        for c in children(node):
            walk(c)

    walk(e)
    return out


def replace_hole(e: Expression, hole_id: str, replacement: Expression) -> Expression:
    """Substitute the (unique) hole `hole_id` in `e`; untouched subtrees are shared."""
    match e:
        case Hole(id=h) if h == hole_id:
            return replacement
        case Hole() | Var() | Literal():
            return e
        case FieldAccess(recv, f):
            return FieldAccess(replace_hole(recv, hole_id, replacement), f)
        case FieldAssign(recv, f, value):
            return FieldAssign(
                replace_hole(recv, hole_id, replacement), f,
                replace_hole(value, hole_id, replacement))
        case Call(recv, m, args):
            return Call(
                replace_hole(recv, hole_id, replacement), m,
                tuple(replace_hole(a, hole_id, replacement) for a in args))
        case New(level, cname, args):
            return New(level, cname,
                       tuple(replace_hole(a, hole_id, replacement) for a in args))
        case Seq(first, second):
            return Seq(replace_hole(first, hole_id, replacement),
                       replace_hole(second, hole_id, replacement))
        case If(guard, then, orelse):
            return If(replace_hole(guard, hole_id, replacement),
                      replace_hole(then, hole_id, replacement),
                      replace_hole(orelse, hole_id, replacement))
        case While(guard, body):
            return While(replace_hole(guard, hole_id, replacement),
                         replace_hole(body, hole_id, replacement))
        case Declassify(inner):
            return Declassify(replace_hole(inner, hole_id, replacement))
        case Decl(t, n, init, rest):
            return Decl(t, n, replace_hole(init, hole_id, replacement),
                        replace_hole(rest, hole_id, replacement))
    raise TypeError(f"unknown expression {e!r}")


# ---------------------------------------------------------------------------
# Typing contexts

@dataclass(frozen=True)
class TypingContext:
    """Ordered, duplicate-free bindings name -> type (includes `this`)."""

    bindings: tuple[tuple[str, SifoType], ...] = ()

    def lookup(self, name: str) -> Optional[SifoType]:
        for n, t in self.bindings:
            if n == name:
                return t
        return None

    def __contains__(self, name: str) -> bool:
        return self.lookup(name) is not None

    def extended(self, name: str, t: SifoType) -> "TypingContext":
        if name in self:
            raise ValueError(f"duplicate binding '{name}'")
        return TypingContext(self.bindings + ((name, t),))

    def names(self) -> list[str]:
        return [n for n, _ in self.bindings]

    def __str__(self) -> str:
        return ", ".join(f"{n}: {t}" for n, t in self.bindings)


def restrict_mut(ctx: TypingContext, s: str, lat) -> TypingContext:
    """Demote to read every mut binding whose level is not at or above `s`.

    This is the branch/loop context restriction blocking implicit flows: after
    a guard at level s, only objects at s or above may still be mutated.
    """
    out = []
    for name, t in ctx.bindings:
        if t.modifier == Modifier.MUT and not lat.leq(s, t.level):
            t = t.with_modifier(Modifier.READ)
        out.append((name, t))
    return TypingContext(tuple(out))


def substitute_mut_read(ctx: TypingContext) -> TypingContext:
    """View every mut binding as read (precondition of the capsule promotion)."""
    out = []
    for name, t in ctx.bindings:
        if t.modifier == Modifier.MUT:
            t = t.with_modifier(Modifier.READ)
        out.append((name, t))
    return TypingContext(tuple(out))


@dataclass(frozen=True)
class HoleSpec:
    """A hole's local obligations: its context, required type, and opaque
    functional pre/postconditions carried through refinements verbatim."""

    id: str
    context: TypingContext
    required: SifoType
    pre: str = ""
    post: str = ""


# ---------------------------------------------------------------------------
# Declarations and class tables

@dataclass(frozen=True)
class MethodDef:
    header: MethodHeader
    body: Expression
    span: object = field(compare=False, default=None)


@dataclass(frozen=True)
class ClassDecl:
    kind: str  # "class" | "interface"
    name: str
    supers: tuple[str, ...] = ()
    fields: tuple[FieldDecl, ...] = ()
    methods: tuple[MethodDef, ...] = ()        # classes
    method_headers: tuple[MethodHeader, ...] = ()  # interfaces
    span: object = field(compare=False, default=None)


class ClassTableError(Exception):
    pass


BUILTIN_CLASSES = ("int", "Boolean", "String", "void")

# Binary operators desugar to method calls on built-ins; each entry is
# (class, op, param class, return class). Levels are bottom at declaration and
# raised on demand through the multiple-method-types machinery.
BUILTIN_OPERATORS = [
    ("int", "+", "int", "int"),
    ("int", "-", "int", "int"),
    ("int", "*", "int", "int"),
    ("int", "==", "int", "Boolean"),
    ("int", "!=", "int", "Boolean"),
    ("int", "<", "int", "Boolean"),
    ("int", "<=", "int", "Boolean"),
    ("int", ">", "int", "Boolean"),
    ("int", ">=", "int", "Boolean"),
    ("Boolean", "==", "Boolean", "Boolean"),
    ("Boolean", "!=", "Boolean", "Boolean"),
    ("Boolean", "&&", "Boolean", "Boolean"),
    ("Boolean", "||", "Boolean", "Boolean"),
    ("String", "==", "String", "Boolean"),
    ("String", "+", "String", "String"),
]


def _builtin_decls(bottom: str) -> dict[str, ClassDecl]:
    headers: dict[str, list[MethodHeader]] = {c: [] for c in BUILTIN_CLASSES}
    for cls, op, param, ret in BUILTIN_OPERATORS:
        headers[cls].append(MethodHeader(
            receiver_level=bottom,
            receiver_modifier=Modifier.IMM,
            return_type=SifoType(bottom, Modifier.IMM, ret),
            name=op,
            params=(("other", SifoType(bottom, Modifier.IMM, param)),),
        ))
    return {
        c: ClassDecl(kind="interface", name=c, method_headers=tuple(headers[c]))
        for c in BUILTIN_CLASSES
    }


class ClassTable:
    """Nominal class/interface environment, built-ins included.

    Subtyping between class names is the reflexive-transitive closure of the
    declared implements/extends edges; the graph must be acyclic.
    """

    def __init__(self, declarations: list[ClassDecl], bottom_level: str):
        self.decls: dict[str, ClassDecl] = dict(_builtin_decls(bottom_level))
        for d in declarations:
            if d.name in self.decls:
                raise ClassTableError(f"duplicate class '{d.name}'")
            self.decls[d.name] = d
        self._validate()

    def _validate(self) -> None:
        for d in self.decls.values():
            for sup in d.supers:
                if sup not in self.decls:
                    raise ClassTableError(f"class '{d.name}': unknown supertype '{sup}'")
            names = [f.name for f in d.fields]
            if len(names) != len(set(names)):
                raise ClassTableError(f"class '{d.name}': duplicate field names")
            for f in d.fields:
                if f.type.modifier not in (Modifier.MUT, Modifier.IMM):
                    raise ClassTableError(
                        f"class '{d.name}': field '{f.name}' must be mut or imm")
            headers = d.method_headers if d.kind == "interface" else tuple(m.header for m in d.methods)
            mnames = [h.name for h in headers]
            if len(mnames) != len(set(mnames)):
                raise ClassTableError(f"class '{d.name}': duplicate method names")
            for h in headers:
                pnames = [p for p, _ in h.params]
                if len(pnames) != len(set(pnames)) or "this" in pnames:
                    raise ClassTableError(
                        f"method '{d.name}.{h.name}': illegal parameter names")
        # Acyclicity of the supertype graph.
        state: dict[str, int] = {}

        def visit(c: str) -> None:
            if state.get(c) == 1:
                raise ClassTableError(f"cycle in supertype graph at '{c}'")
            if state.get(c) == 2:
                return
            state[c] = 1
            for sup in self.decls[c].supers:
                visit(sup)
            state[c] = 2

        for c in self.decls:
            visit(c)

    def __contains__(self, name: str) -> bool:
        return name in self.decls

    def decl(self, name: str) -> ClassDecl:
        if name not in self.decls:
            raise ClassTableError(f"unknown class '{name}'")
        return self.decls[name]

    def supertypes(self, name: str) -> list[str]:
        """Reflexive-transitive supertypes of `name`, nearest first."""
        seen: list[str] = []
        work = [name]
        while work:
            c = work.pop(0)
            if c in seen:
                continue
            seen.append(c)
            work.extend(self.decl(c).supers)
        return seen

    def class_leq(self, a: str, b: str) -> bool:
        return b in self.supertypes(a)

    def fields(self, name: str) -> tuple[FieldDecl, ...]:
        return self.decl(name).fields

    def field(self, name: str, f: str) -> Optional[FieldDecl]:
        for fd in self.fields(name):
            if fd.name == f:
                return fd
        return None

    def headers(self, name: str) -> list[tuple[str, MethodHeader]]:
        """All method headers visible on `name`, paired with the declaring class."""
        out = []
        seen = set()
        for c in self.supertypes(name):
            d = self.decl(c)
            hs = d.method_headers if d.kind == "interface" else tuple(m.header for m in d.methods)
            for h in hs:
                if h.name not in seen:
                    seen.add(h.name)
                    out.append((c, h))
        return out

    def header(self, name: str, m: str) -> Optional[MethodHeader]:
        for _, h in self.headers(name):
            if h.name == m:
                return h
        return None

    def user_decls(self) -> list[ClassDecl]:
        return [d for n, d in self.decls.items() if n not in BUILTIN_CLASSES]


def literal_type(lit: Literal, bottom: str) -> SifoType:
    return SifoType(bottom, Modifier.IMM, lit.kind)
