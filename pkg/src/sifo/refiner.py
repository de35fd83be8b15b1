"""Hole-driven construction of method bodies.

A session starts from a declared method header as a single typed hole and is
transformed step by step; every step re-validates its side conditions against
the class table and lattice, so a completed session always re-typechecks in
the standalone checker (`verify_soundness` is the executable oracle for that
guarantee).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Optional

from sifo.lattice import SecurityLattice
from sifo.parser import ParseError, ScriptStep
from sifo.syntax import (
    Call, ClassTable, Decl, Declassify, Expression, FieldAssign, FieldAccess,
    Hole, HoleSpec, If, Literal, MethodDef, MethodHeader, Modifier, New, Seq,
    SifoType, Signature, TypingContext, Var, While, holes, literal_type,
    modifier_leq, replace_hole, restrict_mut, substitute_mut_read,
)
from sifo.typechecker import (
    Checker, TypeIssue, field_arrow, meth_types, raise_type, subtype,
)

ROOT_HOLE = "eA"

RULES = (
    "Variable", "Literal", "FieldAssignment", "FieldAccess", "MethodCall",
    "Constructor", "Composition", "Selection", "Repetition", "Subsumption",
    "SecurityPromotion", "ModifierPromotion", "Declassification", "LocalDecl",
)


class RefinementError(Exception):
    pass


class UnknownHole(RefinementError):
    pass


class UnknownMethod(RefinementError):
    pass


class EmptyLog(RefinementError):
    pass


class IncompleteError(RefinementError):
    def __init__(self, open_holes: list[str]):
        super().__init__(f"session incomplete, open holes: {', '.join(open_holes)}")
        self.open_holes = open_holes


class SideConditionError(RefinementError):
    """A refinement step whose side condition fails; names the violated rule."""

    def __init__(self, rule: str, premise: str):
        super().__init__(f"{rule}: {premise}")
        self.rule = rule
        self.premise = premise


@dataclass(frozen=True)
class RefinementStep:
    rule: str
    hole_id: str
    name: str = ""                       # variable/field/method/local name
    level: str = ""                      # s0 / s / s'
    class0: str = ""                     # receiver class for FieldAssignment
    type0: Optional[SifoType] = None     # recv type / T0 / T' / local type
    signature: Optional[Signature] = None
    literal: Optional[Literal] = None

    def to_line(self) -> str:
        r, h = self.rule, self.hole_id
        if r == "Variable":
            return f"Variable @ {h} {self.name}"
        if r == "Literal":
            from sifo.parser import pretty_expr
            return f"Literal @ {h} {pretty_expr(self.literal)}"
        if r == "FieldAssignment":
            return f"FieldAssignment @ {h} {self.level} {self.class0} {self.name}"
        if r == "FieldAccess":
            t = self.type0
            return f"FieldAccess @ {h} {t.level} {t.modifier} {t.class_name} {self.name}"
        if r == "MethodCall":
            sig = self.signature
            ps = " ".join(str(p) for p in sig.params)
            ps = f"( {ps} )" if ps else "( )"
            return f"MethodCall @ {h} {self.name} {sig.receiver} {ps} -> {sig.ret}"
        if r == "Constructor":
            return f"Constructor @ {h}"
        if r == "Composition":
            return f"Composition @ {h} {self.type0}" if self.type0 else f"Composition @ {h}"
        if r == "LocalDecl":
            return f"LocalDecl @ {h} {self.name} {self.type0}"
        if r in ("Selection", "Repetition", "SecurityPromotion", "Declassification"):
            return f"{r} @ {h} {self.level}"
        if r == "Subsumption":
            return f"Subsumption @ {h} {self.type0}"
        if r == "ModifierPromotion":
            return f"ModifierPromotion @ {h}"
        raise ValueError(f"unknown rule {r}")


def _take_type(args: list[str], what: str) -> SifoType:
    if len(args) < 3:
        raise RefinementError(f"expected a type ({what})")
    level, mdf, cls = args.pop(0), args.pop(0), args.pop(0)
    try:
        return SifoType(level, Modifier(mdf), cls)
    except ValueError as err:
        raise RefinementError(f"bad modifier in {what}: {mdf}") from err


def step_from_script(s: ScriptStep) -> RefinementStep:
    """Elaborate a parsed script line into a typed refinement step."""
    args = list(s.args)
    r, h = s.rule, s.hole_id
    try:
        if r == "Variable":
            return RefinementStep(r, h, name=args[0])
        if r == "Literal":
            return RefinementStep(r, h, literal=_parse_literal(args[0]))
        if r == "FieldAssignment":
            return RefinementStep(r, h, level=args[0], class0=args[1], name=args[2])
        if r == "FieldAccess":
            t = _take_type(args, "receiver type")
            return RefinementStep(r, h, type0=t, name=args[0])
        if r == "MethodCall":
            name = args.pop(0)
            recv = _take_type(args, "receiver type")
            if args.pop(0) != "(":
                raise RefinementError("expected '(' in signature")
            params = []
            while args[0] != ")":
                params.append(_take_type(args, "parameter type"))
            args.pop(0)
            if args.pop(0) != "->":
                raise RefinementError("expected '->' in signature")
            ret = _take_type(args, "return type")
            return RefinementStep(r, h, name=name,
                                  signature=Signature(recv, tuple(params), ret))
        if r == "Constructor":
            return RefinementStep(r, h)
        if r == "Composition":
            t0 = _take_type(args, "first type") if args else None
            return RefinementStep(r, h, type0=t0)
        if r == "LocalDecl":
            name = args.pop(0)
            return RefinementStep(r, h, name=name, type0=_take_type(args, "local type"))
        if r in ("Selection", "Repetition", "SecurityPromotion", "Declassification"):
            return RefinementStep(r, h, level=args[0])
        if r == "Subsumption":
            return RefinementStep(r, h, type0=_take_type(args, "target type"))
        if r == "ModifierPromotion":
            return RefinementStep(r, h)
    except (IndexError, RefinementError) as err:
        raise RefinementError(f"{s.span}: malformed {r} step: {err}") from err
    raise RefinementError(f"unknown rule '{r}'")


def _parse_literal(token: str) -> Literal:
    if token == "true":
        return Literal("Boolean", True)
    if token == "false":
        return Literal("Boolean", False)
    if token == "unit":
        return Literal("void", None)
    if token.startswith('"') and token.endswith('"'):
        return Literal("String", token[1:-1])
    try:
        return Literal("int", int(token))
    except ValueError:
        raise RefinementError(f"bad literal '{token}'")


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RefinementSession:
    ct: ClassTable = field(compare=False)
    lat: SecurityLattice = field(compare=False)
    class_name: str = ""
    method_name: str = ""
    header: Optional[MethodHeader] = None
    root: Expression = field(default_factory=lambda: Hole(ROOT_HOLE))
    hole_specs: tuple[HoleSpec, ...] = ()
    log: tuple[RefinementStep, ...] = ()
    allow_declassify: bool = False

    @property
    def complete(self) -> bool:
        return not holes(self.root)

    @property
    def status(self) -> str:
        return "complete" if self.complete else "in-progress"

    def spec(self, hole_id: str) -> HoleSpec:
        for hs in self.hole_specs:
            if hs.id == hole_id:
                return hs
        raise UnknownHole(f"no open hole '{hole_id}'")

    def open_holes(self) -> list[str]:
        return holes(self.root)


def start_session(ct: ClassTable, lat: SecurityLattice, class_name: str,
                  method_name: str, allow_declassify: bool = False,
                  pre: str = "", post: str = "") -> RefinementSession:
    decl = ct.decl(class_name)
    header = None
    for m in (decl.methods if decl.kind == "class" else ()):
        if m.header.name == method_name:
            header = m.header
    if header is None:
        for h in decl.method_headers:
            if h.name == method_name:
                header = h
    if header is None:
        raise UnknownMethod(f"no method '{method_name}' on class '{class_name}'")
    ctx = TypingContext(
        (("this", SifoType(header.receiver_level, header.receiver_modifier, class_name)),)
        + tuple(header.params))
    root_spec = HoleSpec(ROOT_HOLE, ctx, header.return_type, pre=pre, post=post)
    return RefinementSession(
        ct=ct, lat=lat, class_name=class_name, method_name=method_name,
        header=header, root=Hole(ROOT_HOLE), hole_specs=(root_spec,),
        allow_declassify=allow_declassify)


def _fresh_ids(sess: RefinementSession, parent: str, n: int) -> list[str]:
    used = set(holes(sess.root)) | {hs.id for hs in sess.hole_specs}
    out = []
    for i in range(1, n + 1):
        cand = f"{parent}{i}"
        while cand in used or cand in out:
            cand += "_"
        out.append(cand)
    return out


def _is_void(t: SifoType) -> bool:
    return t.class_name == "void"


def apply_step(sess: RefinementSession, step: RefinementStep) -> RefinementSession:
    """Apply one refinement; all-or-nothing, raising on any failed premise."""
    spec = sess.spec(step.hole_id)
    if step.rule not in RULES:
        raise RefinementError(f"unknown rule '{step.rule}'")
    handler = _HANDLERS[step.rule]
    replacement, new_specs = handler(sess, spec, step)
    specs = tuple(hs for hs in sess.hole_specs if hs.id != spec.id) + tuple(new_specs)
    root = replace_hole(sess.root, spec.id, replacement) if replacement is not None else sess.root
    # In-place rewrites (replacement None) only touch the hole's spec.
    live = set(holes(root))
    specs = tuple(hs for hs in specs if hs.id in live)
    return replace(sess, root=root, hole_specs=specs, log=sess.log + (step,))


def _inherit(spec: HoleSpec, hid: str, ctx: TypingContext, t: SifoType) -> HoleSpec:
    return HoleSpec(hid, ctx, t, pre=spec.pre, post=spec.post)


def _rule_variable(sess, spec, step):
    t = spec.context.lookup(step.name)
    if t is None:
        raise SideConditionError("Variable", f"'{step.name}' is not in the typing context")
    if t != spec.required:
        raise SideConditionError(
            "Variable",
            f"'{step.name}' has type {t}, hole requires {spec.required} "
            f"(use Subsumption/promotions first)")
    return Var(step.name), []


def _rule_literal(sess, spec, step):
    if step.literal is None:
        raise RefinementError("Literal step needs a literal value")
    t = literal_type(step.literal, sess.lat.bottom)
    if t != spec.required:
        raise SideConditionError(
            "Literal", f"literal has type {t}, hole requires {spec.required}")
    return step.literal, []


def _rule_field_assignment(sess, spec, step):
    s0, c0, fname = step.level, step.class0, step.name
    sess.lat.check_level(s0)
    fd = sess.ct.field(c0, fname) if c0 in sess.ct else None
    if fd is None:
        raise SideConditionError(
            "Field Assignment", f"class '{c0}' has no field '{fname}'")
    s1 = sess.lat.lub(s0, fd.type.level)
    value_t = SifoType(s1, fd.type.modifier, fd.type.class_name)
    if not _is_void(spec.required) and spec.required != value_t:
        raise SideConditionError(
            "Field Assignment",
            f"hole requires {spec.required}, assignment yields {value_t}")
    h0, h1 = _fresh_ids(sess, spec.id, 2)
    recv_t = SifoType(s0, Modifier.MUT, c0)
    return (
        FieldAssign(Hole(h0), fname, Hole(h1)),
        [_inherit(spec, h0, spec.context, recv_t),
         _inherit(spec, h1, spec.context, value_t)],
    )


def _rule_field_access(sess, spec, step):
    t0, fname = step.type0, step.name
    sess.lat.check_level(t0.level)
    fd = sess.ct.field(t0.class_name, fname) if t0.class_name in sess.ct else None
    if fd is None:
        raise SideConditionError(
            "Field Access", f"class '{t0.class_name}' has no field '{fname}'")
    req = spec.required
    if fd.type.class_name != req.class_name:
        raise SideConditionError(
            "Field Access",
            f"field '{fname}' has class '{fd.type.class_name}', hole requires "
            f"'{req.class_name}'")
    if sess.lat.lub(t0.level, fd.type.level) != req.level:
        raise SideConditionError(
            "Field Access",
            f"access level is lub({t0.level},{fd.type.level}), hole requires "
            f"'{req.level}'")
    if field_arrow(t0.modifier, fd.type.modifier) != req.modifier:
        raise SideConditionError(
            "Field Access",
            f"access modifier is {field_arrow(t0.modifier, fd.type.modifier)}, "
            f"hole requires {req.modifier}")
    (h0,) = _fresh_ids(sess, spec.id, 1)
    return FieldAccess(Hole(h0), fname), [_inherit(spec, h0, spec.context, t0)]


def _rule_method_call(sess, spec, step):
    sig = step.signature
    if sig is None:
        raise RefinementError("MethodCall step needs a signature")
    try:
        candidates = meth_types(sess.ct, sess.lat, sig.receiver.class_name, step.name)
    except TypeIssue as err:
        raise SideConditionError("Method Call", err.message)
    if sig not in candidates:
        raise SideConditionError(
            "Method Call",
            f"signature {sig} is not a derivable type of "
            f"'{sig.receiver.class_name}.{step.name}'")
    if sig.ret != spec.required:
        raise SideConditionError(
            "Method Call",
            f"return type {sig.ret} differs from hole type {spec.required}")
    s0 = sig.receiver.level
    if not sess.lat.leq(s0, sig.ret.level):
        raise SideConditionError(
            "Method Call",
            f"return level '{sig.ret.level}' below receiver level '{s0}'")
    for p in sig.params:
        if p.modifier in (Modifier.MUT, Modifier.CAPSULE) and not sess.lat.leq(s0, p.level):
            raise SideConditionError(
                "Method Call",
                f"mut/capsule parameter level '{p.level}' below receiver level '{s0}'")
    ids = _fresh_ids(sess, spec.id, 1 + len(sig.params))
    specs = [_inherit(spec, ids[0], spec.context, sig.receiver)]
    specs += [_inherit(spec, hid, spec.context, p)
              for hid, p in zip(ids[1:], sig.params)]
    return Call(Hole(ids[0]), step.name, tuple(Hole(h) for h in ids[1:])), specs


def _rule_constructor(sess, spec, step):
    req = spec.required
    if req.modifier != Modifier.MUT:
        raise SideConditionError(
            "Constructor",
            f"constructed objects are mut; hole requires {req} "
            f"(use ModifierPromotion/Subsumption first)")
    if req.class_name not in sess.ct or sess.ct.decl(req.class_name).kind != "class":
        raise SideConditionError(
            "Constructor", f"'{req.class_name}' is not a constructible class")
    flds = sess.ct.fields(req.class_name)
    try:
        raised = [raise_type(fd.type, req.level, sess.lat) for fd in flds]
    except TypeIssue as err:
        raise SideConditionError("Constructor", err.message)
    ids = _fresh_ids(sess, spec.id, len(flds))
    specs = [_inherit(spec, hid, spec.context, t) for hid, t in zip(ids, raised)]
    return New(req.level, req.class_name, tuple(Hole(h) for h in ids)), specs


def _rule_composition(sess, spec, step):
    t0 = step.type0 or SifoType(sess.lat.bottom, Modifier.IMM, "void")
    sess.lat.check_level(t0.level)
    h0, h1 = _fresh_ids(sess, spec.id, 2)
    return (
        Seq(Hole(h0), Hole(h1)),
        [_inherit(spec, h0, spec.context, t0),
         _inherit(spec, h1, spec.context, spec.required)],
    )


def _rule_local_decl(sess, spec, step):
    if step.type0 is None or not step.name:
        raise RefinementError("LocalDecl step needs a name and a type")
    if step.name in spec.context:
        raise SideConditionError(
            "Local Declaration", f"'{step.name}' already bound in the typing context")
    sess.lat.check_level(step.type0.level)
    if step.type0.class_name not in sess.ct:
        raise SideConditionError(
            "Local Declaration", f"unknown class '{step.type0.class_name}'")
    h0, h1 = _fresh_ids(sess, spec.id, 2)
    return (
        Decl(step.type0, step.name, Hole(h0), Hole(h1)),
        [_inherit(spec, h0, spec.context, step.type0),
         _inherit(spec, h1, spec.context.extended(step.name, step.type0), spec.required)],
    )


def _rule_selection(sess, spec, step):
    s = step.level
    sess.lat.check_level(s)
    rctx = restrict_mut(spec.context, s, sess.lat)
    guard_t = SifoType(s, Modifier.IMM, "Boolean")
    h0, h1, h2 = _fresh_ids(sess, spec.id, 3)
    return (
        If(Hole(h0), Hole(h1), Hole(h2)),
        [_inherit(spec, h0, spec.context, guard_t),
         _inherit(spec, h1, rctx, spec.required),
         _inherit(spec, h2, rctx, spec.required)],
    )


def _rule_repetition(sess, spec, step):
    s = step.level
    sess.lat.check_level(s)
    rctx = restrict_mut(spec.context, s, sess.lat)
    guard_t = SifoType(s, Modifier.IMM, "Boolean")
    h0, h1 = _fresh_ids(sess, spec.id, 2)
    return (
        While(Hole(h0), Hole(h1)),
        [_inherit(spec, h0, spec.context, guard_t),
         _inherit(spec, h1, rctx, spec.required)],
    )


def _rule_subsumption(sess, spec, step):
    t_prime = step.type0
    if t_prime is None:
        raise RefinementError("Subsumption step needs a target type")
    sess.lat.check_level(t_prime.level)
    if t_prime.class_name not in sess.ct:
        raise SideConditionError("Subsumption", f"unknown class '{t_prime.class_name}'")
    if not subtype(t_prime, spec.required, sess.ct):
        raise SideConditionError(
            "Subsumption", f"{t_prime} is not a subtype of {spec.required}")
    return None, [_inherit(spec, spec.id, spec.context, t_prime)]


def _rule_security_promotion(sess, spec, step):
    req = spec.required
    if req.modifier not in (Modifier.CAPSULE, Modifier.IMM):
        raise SideConditionError(
            "Security Promotion",
            f"only capsule or imm holes can be promoted, hole requires {req}")
    s_prime = step.level
    sess.lat.check_level(s_prime)
    if not sess.lat.leq(s_prime, req.level):
        raise SideConditionError(
            "Security Promotion", f"'{s_prime}' is not below '{req.level}'")
    return None, [_inherit(spec, spec.id, spec.context, req.with_level(s_prime))]


def _rule_modifier_promotion(sess, spec, step):
    req = spec.required
    if req.modifier != Modifier.CAPSULE:
        raise SideConditionError(
            "Modifier Promotion", f"hole must require capsule, requires {req}")
    return None, [_inherit(spec, spec.id, substitute_mut_read(spec.context),
                           req.with_modifier(Modifier.MUT))]


def _rule_declassification(sess, spec, step):
    if not sess.allow_declassify:
        raise SideConditionError(
            "Declassification",
            "session was not started with the declassify capability")
    req = spec.required
    if req.modifier not in (Modifier.CAPSULE, Modifier.IMM):
        raise SideConditionError(
            "Declassification", f"only capsule or imm holes, hole requires {req}")
    if req.level != sess.lat.bottom:
        raise SideConditionError(
            "Declassification",
            f"hole level must be the bottom level '{sess.lat.bottom}', "
            f"is '{req.level}' (use Security Promotion first)")
    s = step.level
    sess.lat.check_level(s)
    (h0,) = _fresh_ids(sess, spec.id, 1)
    return Declassify(Hole(h0)), [_inherit(spec, h0, spec.context, req.with_level(s))]


_HANDLERS = {
    "Variable": _rule_variable,
    "Literal": _rule_literal,
    "FieldAssignment": _rule_field_assignment,
    "FieldAccess": _rule_field_access,
    "MethodCall": _rule_method_call,
    "Constructor": _rule_constructor,
    "Composition": _rule_composition,
    "LocalDecl": _rule_local_decl,
    "Selection": _rule_selection,
    "Repetition": _rule_repetition,
    "Subsumption": _rule_subsumption,
    "SecurityPromotion": _rule_security_promotion,
    "ModifierPromotion": _rule_modifier_promotion,
    "Declassification": _rule_declassification,
}


# ---------------------------------------------------------------------------


def undo(sess: RefinementSession) -> RefinementSession:
    if not sess.log:
        raise EmptyLog("nothing to undo")
    return replay(sess.ct, sess.lat, sess.class_name, sess.method_name,
                  sess.log[:-1], allow_declassify=sess.allow_declassify)


def replay(ct: ClassTable, lat: SecurityLattice, class_name: str,
           method_name: str, steps: Iterable[RefinementStep],
           allow_declassify: bool = False) -> RefinementSession:
    sess = start_session(ct, lat, class_name, method_name,
                         allow_declassify=allow_declassify)
    for step in steps:
        sess = apply_step(sess, step)
    return sess


def export_method(sess: RefinementSession) -> str:
    from sifo.parser import pretty_method
    open_holes = sess.open_holes()
    if open_holes:
        raise IncompleteError(open_holes)
    return pretty_method(sess.class_name, MethodDef(sess.header, sess.root))


def verify_soundness(sess: RefinementSession) -> list[TypeIssue]:
    """Theorem-1 oracle: a completed session must re-typecheck as-is."""
    open_holes = sess.open_holes()
    if open_holes:
        raise IncompleteError(open_holes)
    checker = Checker(sess.ct, sess.lat)
    return checker.check_method(sess.class_name, MethodDef(sess.header, sess.root))


# ---------------------------------------------------------------------------
# Candidate enumeration for guided construction

def applicable_rules(sess: RefinementSession, hole_id: str,
                     max_candidates: int = 200) -> list[RefinementStep]:
    """Sound (every candidate applies cleanly) but bounded enumeration."""
    spec = sess.spec(hole_id)
    req = spec.required
    lat, ct = sess.lat, sess.ct
    out: list[RefinementStep] = []

    for name, t in spec.context.bindings:
        if t == req:
            out.append(RefinementStep("Variable", hole_id, name=name))

    if req.level == lat.bottom and req.modifier == Modifier.IMM:
        for lit in _literal_samples(req.class_name):
            out.append(RefinementStep("Literal", hole_id, literal=lit))

    user_classes = [d.name for d in ct.user_decls() if d.kind == "class"]

    for c0 in user_classes:
        for fd in ct.fields(c0):
            for s0 in lat.sorted_levels():
                s1 = lat.lub(s0, fd.type.level)
                value_t = SifoType(s1, fd.type.modifier, fd.type.class_name)
                if _is_void(req) or req == value_t:
                    out.append(RefinementStep(
                        "FieldAssignment", hole_id, level=s0, class0=c0, name=fd.name))

    for c0 in user_classes:
        for fd in ct.fields(c0):
            if fd.type.class_name != req.class_name:
                continue
            for s0 in lat.sorted_levels():
                if lat.lub(s0, fd.type.level) != req.level:
                    continue
                for mdf0 in Modifier:
                    if field_arrow(mdf0, fd.type.modifier) == req.modifier:
                        out.append(RefinementStep(
                            "FieldAccess", hole_id, name=fd.name,
                            type0=SifoType(s0, mdf0, c0)))

    for c0 in list(ct.decls):
        decl = ct.decl(c0)
        headers = (decl.method_headers if decl.kind == "interface"
                   else tuple(m.header for m in decl.methods))
        for h in headers:
            for sig in meth_types(ct, lat, c0, h.name):
                if sig.ret != req:
                    continue
                s0 = sig.receiver.level
                if not lat.leq(s0, sig.ret.level):
                    continue
                if any(p.modifier in (Modifier.MUT, Modifier.CAPSULE)
                       and not lat.leq(s0, p.level) for p in sig.params):
                    continue
                out.append(RefinementStep(
                    "MethodCall", hole_id, name=h.name, signature=sig))

    if (req.modifier == Modifier.MUT and req.class_name in ct
            and ct.decl(req.class_name).kind == "class"):
        try:
            for fd in ct.fields(req.class_name):
                raise_type(fd.type, req.level, lat)
            out.append(RefinementStep("Constructor", hole_id))
        except TypeIssue:
            pass

    out.append(RefinementStep("Composition", hole_id))

    fresh = _fresh_local_name(spec.context)
    seen_types = []
    for _, t in spec.context.bindings:
        if t not in seen_types:
            seen_types.append(t)
    for t in seen_types + [SifoType(lat.bottom, Modifier.IMM, "int")]:
        out.append(RefinementStep("LocalDecl", hole_id, name=fresh, type0=t))

    for s in lat.sorted_levels():
        out.append(RefinementStep("Selection", hole_id, level=s))
        out.append(RefinementStep("Repetition", hole_id, level=s))

    for cls in ct.decls:
        if cls == req.class_name or not ct.class_leq(cls, req.class_name):
            continue
        out.append(RefinementStep(
            "Subsumption", hole_id,
            type0=SifoType(req.level, req.modifier, cls)))
    for mdf in Modifier:
        if mdf != req.modifier and modifier_leq(mdf, req.modifier):
            out.append(RefinementStep(
                "Subsumption", hole_id,
                type0=SifoType(req.level, mdf, req.class_name)))

    if req.modifier in (Modifier.CAPSULE, Modifier.IMM):
        for s in lat.sorted_levels():
            if s != req.level and lat.leq(s, req.level):
                out.append(RefinementStep("SecurityPromotion", hole_id, level=s))

    if req.modifier == Modifier.CAPSULE:
        out.append(RefinementStep("ModifierPromotion", hole_id))

    if (sess.allow_declassify and req.level == lat.bottom
            and req.modifier in (Modifier.CAPSULE, Modifier.IMM)):
        for s in lat.sorted_levels():
            out.append(RefinementStep("Declassification", hole_id, level=s))

    return out[:max_candidates]


def _literal_samples(class_name: str) -> list[Literal]:
    if class_name == "Boolean":
        return [Literal("Boolean", True), Literal("Boolean", False)]
    if class_name == "int":
        return [Literal("int", 0), Literal("int", 1)]
    if class_name == "String":
        return [Literal("String", "")]
    if class_name == "void":
        return [Literal("void", None)]
    return []


def _fresh_local_name(ctx: TypingContext) -> str:
    i = 0
    while f"v{i}" in ctx:
        i += 1
    return f"v{i}"
