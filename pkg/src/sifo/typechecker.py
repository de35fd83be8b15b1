"""The SIFO type system: subtyping, promotions, multiple method types,
expression synthesis/checking and program well-formedness.

The rules are declarative (subsumption and the two promotions may fire
anywhere); here they are made algorithmic by principal synthesis plus a
promotion closure applied at `check_against` boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from sifo.lattice import SecurityLattice
from sifo.syntax import (
    Call, ClassDecl, ClassTable, Decl, Declassify, Expression, FieldAccess,
    FieldAssign, Hole, If, Literal, MethodDef, MethodHeader, Modifier, New,
    Seq, SifoType, Signature, TypingContext, Var, While, literal_type,
    modifier_leq, restrict_mut, substitute_mut_read,
)

ERROR_CODES = (
    "FlowViolation", "ModifierViolation", "UnknownField", "UnknownMethod",
    "UnknownVar", "ArityMismatch", "GuardNotBoolean", "FieldModifierIllegal",
    "InterfaceUnimplemented", "PromotionFailed", "DeclassifyIllegal",
    "IncomparableLevels",
)


@dataclass(frozen=True)
class TypeIssue(Exception):
    code: str
    rule: str
    message: str
    span: Optional[object] = None

    def __str__(self) -> str:
        loc = f"{self.span}: " if self.span else ""
        return f"{loc}{self.code}: {self.rule}: {self.message}"


def subtype(t1: SifoType, t2: SifoType, ct: ClassTable) -> bool:
    """s mdf C <= s mdf' C': class and modifier widen, the level never moves."""
    return (
        t1.level == t2.level
        and modifier_leq(t1.modifier, t2.modifier)
        and ct.class_leq(t1.class_name, t2.class_name)
    )


def field_arrow(recv: Modifier, fld: Modifier) -> Modifier:
    """Modifier of a field accessed through a receiver with modifier `recv`."""
    if recv in (Modifier.MUT, Modifier.CAPSULE):
        return fld
    if recv == Modifier.IMM or fld == Modifier.IMM:
        return Modifier.IMM
    # recv == read, fld == mut
    return Modifier.READ


def raise_type(t: SifoType, s: str, lat: SecurityLattice) -> SifoType:
    """Raise t's level to lub(s, level); only defined for comparable levels."""
    if not (lat.leq(t.level, s) or lat.leq(s, t.level)):
        raise TypeIssue(
            "IncomparableLevels", "Constructor",
            f"levels '{t.level}' and '{s}' are incomparable")
    return t.with_level(lat.lub(t.level, s))


def _subst_modifiers(t: SifoType, table: dict[Modifier, Modifier]) -> SifoType:
    return t.with_modifier(table.get(t.modifier, t.modifier))


def _subst_sig(sig: Signature, table: dict[Modifier, Modifier]) -> Signature:
    return Signature(
        receiver=_subst_modifiers(sig.receiver, table),
        params=tuple(_subst_modifiers(p, table) for p in sig.params),
        ret=_subst_modifiers(sig.ret, table),
    )


def meth_types(ct: ClassTable, lat: SecurityLattice, class_name: str, m: str
               ) -> list[Signature]:
    """All signatures derivable from the declared header of `m` on `class_name`.

    For every level s' at which the raised signature is defined, three variants
    are emitted: the raised signature itself, the same with mut replaced by
    capsule, and the same with additionally read replaced by imm.
    """
    found = None
    for declaring, h in ct.headers(class_name):
        if h.name == m:
            found = h.signature(class_name)
            break
    if found is None:
        raise TypeIssue("UnknownMethod", "Call",
                        f"no method '{m}' on class '{class_name}'")

    out: list[Signature] = []
    seen = set()
    for s_prime in lat.sorted_levels():
        try:
            raised = Signature(
                receiver=raise_type(found.receiver, s_prime, lat),
                params=tuple(raise_type(p, s_prime, lat) for p in found.params),
                ret=raise_type(found.ret, s_prime, lat),
            )
        except TypeIssue:
            continue
        variants = (
            raised,
            _subst_sig(raised, {Modifier.MUT: Modifier.CAPSULE}),
            _subst_sig(raised, {Modifier.MUT: Modifier.CAPSULE,
                                Modifier.READ: Modifier.IMM}),
        )
        for v in variants:
            if v not in seen:
                seen.add(v)
                out.append(v)
    return out


def _is_void(t: SifoType) -> bool:
    return t.class_name == "void"


class Checker:
    """Expression-level checker over a fixed class table and lattice."""

    def __init__(self, ct: ClassTable, lat: SecurityLattice):
        self.ct = ct
        self.lat = lat

    # -- synthesis ---------------------------------------------------------

    def type_of(self, ctx: TypingContext, e: Expression) -> SifoType:
        """Principal type synthesis for hole-free expressions."""
        match e:
            case Hole(id=h):
                raise TypeIssue("UnknownVar", "T-Var",
                                f"expression still contains hole '{h}'")
            case Var(name):
                t = ctx.lookup(name)
                if t is None:
                    raise TypeIssue("UnknownVar", "T-Var", f"unknown variable '{name}'")
                return t
            case Literal():
                return literal_type(e, self.lat.bottom)
            case FieldAccess(recv, f):
                t0 = self.type_of(ctx, recv)
                fd = self.ct.field(t0.class_name, f)
                if fd is None:
                    raise TypeIssue("UnknownField", "Field Access",
                                    f"class '{t0.class_name}' has no field '{f}'")
                return SifoType(
                    self.lat.lub(t0.level, fd.type.level),
                    field_arrow(t0.modifier, fd.type.modifier),
                    fd.type.class_name,
                )
            case FieldAssign():
                return self._type_field_assign(ctx, e)
            case Call():
                return self._type_call(ctx, e)
            case New(level, cname, args):
                return self._type_new(ctx, level, cname, args)
            case Seq(first, second):
                self._type_statement(ctx, first)
                return self.type_of(ctx, second)
            case If(guard, then, orelse):
                s, rctx = self._guard(ctx, guard)
                t1 = self.type_of(rctx, then)
                self.check_against(rctx, orelse, t1)
                return t1
            case While(guard, body):
                s, rctx = self._guard(ctx, guard)
                return self.type_of(rctx, body)
            case Declassify(inner):
                t = self.type_of(ctx, inner)
                if t.modifier not in (Modifier.IMM, Modifier.CAPSULE):
                    raise TypeIssue(
                        "DeclassifyIllegal", "Declassification",
                        f"only imm or capsule expressions may be declassified, got {t}")
                return t.with_level(self.lat.bottom)
            case Decl(t, name, init, rest):
                self.check_against(ctx, init, t)
                return self.type_of(ctx.extended(name, t), rest)
        raise TypeIssue("UnknownVar", "T-Var", f"cannot type {e!r}")

    def _type_statement(self, ctx: TypingContext, e: Expression) -> None:
        """Statement position: any type, result discarded, so branches of a
        conditional need not agree."""
        match e:
            case Seq(first, second):
                self._type_statement(ctx, first)
                self._type_statement(ctx, second)
            case If(guard, then, orelse):
                s, rctx = self._guard(ctx, guard)
                self._type_statement(rctx, then)
                self._type_statement(rctx, orelse)
            case While(guard, body):
                s, rctx = self._guard(ctx, guard)
                self._type_statement(rctx, body)
            case Decl(t, name, init, rest):
                self.check_against(ctx, init, t)
                self._type_statement(ctx.extended(name, t), rest)
            case _:
                self.type_of(ctx, e)

    def _guard(self, ctx: TypingContext, guard: Expression):
        t = self.type_of(ctx, guard)
        if t.class_name != "Boolean" or not modifier_leq(t.modifier, Modifier.IMM):
            raise TypeIssue("GuardNotBoolean", "Selection",
                            f"guard must be an imm Boolean, got {t}")
        return t.level, restrict_mut(ctx, t.level, self.lat)

    def _type_field_assign(self, ctx: TypingContext, e: FieldAssign) -> SifoType:
        t0 = self.type_of(ctx, e.recv)
        if not modifier_leq(t0.modifier, Modifier.MUT):
            raise TypeIssue(
                "ModifierViolation", "Field Assign",
                f"assignment receiver must be mut, got {t0}")
        fd = self.ct.field(t0.class_name, e.field)
        if fd is None:
            raise TypeIssue("UnknownField", "Field Assign",
                            f"class '{t0.class_name}' has no field '{e.field}'")
        required = SifoType(
            self.lat.lub(t0.level, fd.type.level),
            fd.type.modifier,
            fd.type.class_name,
        )
        self.check_against(ctx, e.value, required)
        return required

    def _type_call(self, ctx: TypingContext, e: Call) -> SifoType:
        t0 = self.type_of(ctx, e.recv)
        sigs = meth_types(self.ct, self.lat, t0.class_name, e.method)
        successes: list[SifoType] = []
        last_err: Optional[TypeIssue] = None
        for sig in sigs:
            if len(sig.params) != len(e.args):
                last_err = TypeIssue(
                    "ArityMismatch", "Call",
                    f"method '{e.method}' expects {len(sig.params)} arguments")
                continue
            try:
                self._check_call_sites(ctx, e, sig)
            except TypeIssue as err:
                # Flow errors explain the rejection better than the modifier
                # mismatches of the substituted signature variants.
                if last_err is None or (err.code == "FlowViolation"
                                        and last_err.code != "FlowViolation"):
                    last_err = err
                continue
            successes.append(sig.ret)
        if not successes:
            assert last_err is not None
            raise last_err
        return self._minimal(successes)

    def _check_call_sites(self, ctx: TypingContext, e: Call, sig: Signature) -> None:
        self.check_against(ctx, e.recv, sig.receiver)
        for arg, pt in zip(e.args, sig.params):
            self.check_against(ctx, arg, pt)
        s0 = sig.receiver.level
        if not self.lat.leq(s0, sig.ret.level):
            raise TypeIssue(
                "FlowViolation", "Call",
                f"return level '{sig.ret.level}' must be at least the receiver "
                f"level '{s0}'")
        for pt in sig.params:
            if pt.modifier in (Modifier.MUT, Modifier.CAPSULE) and not self.lat.leq(s0, pt.level):
                raise TypeIssue(
                    "FlowViolation", "Call",
                    f"mut/capsule parameter level '{pt.level}' must be at least "
                    f"the receiver level '{s0}'")

    def _minimal(self, types: list[SifoType]) -> SifoType:
        def reachable(a: SifoType, b: SifoType) -> bool:
            # b obtainable from a by subsumption and promotions
            try:
                return self._promotes_to(a, b)
            except TypeIssue:
                return False
        for t in types:
            if all(reachable(t, u) for u in types):
                return t
        # No least element; deterministic fallback.
        return sorted(types, key=str)[0]

    def _promotes_to(self, t: SifoType, required: SifoType) -> bool:
        if subtype(t, required, self.ct):
            return True
        if (t.modifier in (Modifier.IMM, Modifier.CAPSULE)
                and self.lat.leq(t.level, required.level)):
            return subtype(t.with_level(required.level), required, self.ct)
        return False

    def _type_new(self, ctx: TypingContext, level: str, cname: str,
                  args: tuple[Expression, ...]) -> SifoType:
        decl = self.ct.decl(cname)
        if decl.kind != "class":
            raise TypeIssue("UnknownMethod", "New",
                            f"cannot construct interface '{cname}'")
        flds = self.ct.fields(cname)
        if len(flds) != len(args):
            raise TypeIssue(
                "ArityMismatch", "New",
                f"constructor of '{cname}' takes {len(flds)} arguments, got {len(args)}")
        for fd, arg in zip(flds, args):
            self.check_against(ctx, arg, raise_type(fd.type, level, self.lat))
        return SifoType(level, Modifier.MUT, cname)

    # -- checking ----------------------------------------------------------

    def check_against(self, ctx: TypingContext, e: Expression,
                      required: SifoType) -> None:
        """Accept iff `e` is typable at `required` via synthesis plus the
        subsumption/security-promotion/capsule-promotion closure."""
        match e:
            case Seq(first, second):
                self._type_statement(ctx, first)
                self.check_against(ctx, second, required)
                return
            case If(guard, then, orelse):
                s, rctx = self._guard(ctx, guard)
                self.check_against(rctx, then, required)
                self.check_against(rctx, orelse, required)
                return
            case While(guard, body):
                s, rctx = self._guard(ctx, guard)
                self.check_against(rctx, body, required)
                return
            case Decl(t, name, init, rest):
                self.check_against(ctx, init, t)
                self.check_against(ctx.extended(name, t), rest, required)
                return
            case FieldAssign() if _is_void(required):
                # Statement-position assignment: check it, discard its type.
                self._type_field_assign(ctx, e)
                return
            case Declassify(inner):
                if required.modifier not in (Modifier.IMM, Modifier.CAPSULE):
                    raise TypeIssue(
                        "DeclassifyIllegal", "Declassification",
                        f"declassified expressions are imm or capsule, required {required}")
                t = self.type_of(ctx, e)  # bottom-levelled
                self._close(ctx, e, t, required)
                return
        t = self.type_of(ctx, e)
        self._close(ctx, e, t, required)

    def _close(self, ctx: TypingContext, e: Expression, t: SifoType,
               required: SifoType) -> None:
        if self._promotes_to(t, required):
            return
        # Capsule promotion: retry synthesis with mut bindings viewed as read.
        if required.modifier in (Modifier.CAPSULE, Modifier.IMM):
            try:
                t2 = self.type_of(substitute_mut_read(ctx), e)
            except TypeIssue:
                t2 = None
            if t2 is not None and t2.modifier == Modifier.MUT:
                promoted = t2.with_modifier(Modifier.CAPSULE)
                if self._promotes_to(promoted, required):
                    return
        level_ok = t.level == required.level or (
            t.modifier in (Modifier.IMM, Modifier.CAPSULE)
            and self.lat.leq(t.level, required.level))
        if not level_ok:
            raise TypeIssue(
                "FlowViolation", "Sec-Prom",
                f"expression of type {t} does not flow to {required}")
        if required.modifier in (Modifier.CAPSULE, Modifier.IMM):
            raise TypeIssue(
                "PromotionFailed", "Prom",
                f"expression has type {t}, cannot be promoted to {required}")
        raise TypeIssue(
            "ModifierViolation", "Sub",
            f"expression of type {t} is not a subtype of {required}")

    # -- declarations ------------------------------------------------------

    def check_method(self, class_name: str, md: MethodDef) -> list[TypeIssue]:
        h = md.header
        ctx = TypingContext(
            (("this", SifoType(h.receiver_level, h.receiver_modifier, class_name)),)
            + tuple(h.params))
        try:
            self.check_against(ctx, md.body, h.return_type)
        except TypeIssue as err:
            if err.span is None and md.span is not None:
                err = TypeIssue(err.code, err.rule, err.message, md.span)
            return [err]
        return []

    def check_program(self) -> list[TypeIssue]:
        errors: list[TypeIssue] = []
        for d in self.ct.user_decls():
            if d.kind == "interface":
                continue
            for md in d.methods:
                errors.extend(self.check_method(d.name, md))
            # Every interface obligation must be implemented verbatim.
            own = {m.header.name: m.header for m in d.methods}
            for sup in self.ct.supertypes(d.name):
                if sup == d.name:
                    continue
                sd = self.ct.decl(sup)
                if sd.kind != "interface":
                    continue
                for h in sd.method_headers:
                    if own.get(h.name) != h:
                        errors.append(TypeIssue(
                            "InterfaceUnimplemented", "C-Ok",
                            f"class '{d.name}' does not implement "
                            f"'{sup}.{h.name}' with an identical header"))
        return errors
