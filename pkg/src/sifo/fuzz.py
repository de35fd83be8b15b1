"""Randomized soundness oracle for the refinement engine.

Generates small random class tables and random rule walks; every session that
reaches completion must re-typecheck in the standalone checker. Any failure is
an engine or checker bug and is reported with the full replayable step log.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from sifo.lattice import SecurityLattice, build_lattice
from sifo.refiner import (
    RefinementSession, RefinementStep, SideConditionError, applicable_rules,
    apply_step, export_method, start_session, verify_soundness,
)
from sifo.syntax import (
    ClassDecl, ClassTable, FieldDecl, Literal, MethodDef, MethodHeader,
    Modifier, SifoType, Var,
)

TWO_LEVEL = build_lattice(["low", "high"], [("low", "high")])
DIAMOND = build_lattice(
    ["bot", "left", "right", "top"],
    [("bot", "left"), ("bot", "right"), ("left", "top"), ("right", "top")])

_CLASS_NAMES = ["Alpha", "Beta", "Gamma", "Delta"]
_FIELD_CLASSES = ["int", "Boolean"]

CLOSING_RULES = {"Variable", "Literal", "FieldAccess"}
REWRITE_RULES = {"Subsumption", "SecurityPromotion", "ModifierPromotion",
                 "Declassification"}


@dataclass
class FuzzReport:
    iterations: int = 0
    completed: int = 0
    abandoned: int = 0
    failures: list[tuple[int, list[str]]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def summary(self) -> str:
        return (f"iterations={self.iterations} completed={self.completed} "
                f"abandoned={self.abandoned} failures={len(self.failures)}")


def random_class_table(rng: random.Random, lat: SecurityLattice,
                       max_classes: int = 4) -> tuple[ClassTable, str, str]:
    """A small random program plus one (class, method) to construct."""
    levels = lat.sorted_levels()
    n_classes = rng.randint(1, max_classes)
    decls = []
    names = _CLASS_NAMES[:n_classes]
    for name in names:
        fields = []
        for i in range(rng.randint(0, 3)):
            fcls = rng.choice(_FIELD_CLASSES + names[:names.index(name)])
            mdf = Modifier.IMM if fcls in _FIELD_CLASSES else rng.choice(
                [Modifier.MUT, Modifier.IMM])
            fields.append(FieldDecl(
                SifoType(rng.choice(levels), mdf, fcls), f"f{i}"))
        decls.append(ClassDecl(kind="class", name=name, fields=tuple(fields)))

    # The method under construction lives on the last class. Its return type
    # always matches one parameter (or void), so sessions can close.
    target = names[-1]
    recv_level = rng.choice(levels)
    param_types = []
    for i in range(rng.randint(0, 2)):
        pcls = rng.choice(_FIELD_CLASSES + names)
        mdf = (Modifier.IMM if pcls in _FIELD_CLASSES
               else rng.choice(list(Modifier)))
        param_types.append((f"p{i}", SifoType(rng.choice(levels), mdf, pcls)))
    if param_types and rng.random() < 0.6:
        ret = param_types[rng.randrange(len(param_types))][1]
    else:
        ret = SifoType(lat.bottom, Modifier.IMM, "void")
    header = MethodHeader(recv_level, rng.choice([Modifier.MUT, Modifier.IMM]),
                          ret, "build", tuple(param_types))
    body = next((Var(n) for n, t in param_types if t == ret),
                Literal("void", None))
    decls[-1] = ClassDecl(
        kind="class", name=target, fields=decls[-1].fields,
        methods=(MethodDef(header, body),))
    return ClassTable(decls, lat.bottom), target, "build"


def _pick_step(rng: random.Random, sess: RefinementSession, hole_id: str,
               depth: int, max_depth: int) -> RefinementStep | None:
    candidates = applicable_rules(sess, hole_id)
    if not candidates:
        return None
    closing = [c for c in candidates if c.rule in CLOSING_RULES]
    rewrites = [c for c in candidates if c.rule in REWRITE_RULES]
    growing = [c for c in candidates
               if c.rule not in CLOSING_RULES and c.rule not in REWRITE_RULES]
    open_count = len(sess.open_holes())
    budget = max_depth - depth
    # Bias toward structure early and closure late so walks finish in bounds.
    p_close = min(0.95, 0.35 + 0.65 * depth / max_depth)
    if open_count >= budget - 1:
        # Out of room: only close or rewrite toward something closable.
        if closing:
            return rng.choice(closing)
        if rewrites:
            return rng.choice(rewrites)
        return None
    roll = rng.random()
    if closing and (roll < p_close or not (growing or rewrites)):
        return rng.choice(closing)
    if not closing and rewrites and rng.random() < 0.6:
        # Promotions/subsumption often unlock a Variable or Literal next.
        return rng.choice(rewrites)
    if growing:
        return rng.choice(growing)
    if rewrites:
        return rng.choice(rewrites)
    return rng.choice(closing) if closing else None


def run_fuzz(seed: int, iterations: int, max_depth: int = 24,
             lattices: tuple[SecurityLattice, ...] = (TWO_LEVEL, DIAMOND),
             target_completed: int | None = None) -> FuzzReport:
    rng = random.Random(seed)
    report = FuzzReport()
    for it in range(iterations):
        if target_completed is not None and report.completed >= target_completed:
            break
        report.iterations += 1
        lat = lattices[it % len(lattices)]
        ct, cls, meth = random_class_table(rng, lat)
        sess = start_session(ct, lat, cls, meth)
        steps_taken = 0
        rewrite_streak = 0
        while not sess.complete and steps_taken < max_depth:
            hole = sess.open_holes()[0]
            step = _pick_step(rng, sess, hole, steps_taken, max_depth)
            if step is None:
                break
            if step.rule in REWRITE_RULES:
                rewrite_streak += 1
                if rewrite_streak > 3:
                    break
            else:
                rewrite_streak = 0
            try:
                sess = apply_step(sess, step)
            except SideConditionError:
                # Candidate enumeration promises this never happens; treat as
                # a soundness failure of the suggester.
                report.failures.append(
                    (it, [s.to_line() for s in sess.log] + [step.to_line()]))
                break
            steps_taken += 1
        if not sess.complete:
            report.abandoned += 1
            continue
        report.completed += 1
        errors = verify_soundness(sess)
        if errors:
            report.failures.append((it, [s.to_line() for s in sess.log]))
    return report
