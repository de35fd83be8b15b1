"""Security-level algebra: user-defined bounded upper semi-lattices.

Levels and their ordering come from user configuration as a set of names plus
covering edges (lower -> upper). The full order is the reflexive-transitive
closure; the join table, top and bottom are derived and validated here, so the
rest of the system can assume a well-formed bounded upper semi-lattice.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

LEVEL_NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*$")


class LatticeError(Exception):
    """Base for all lattice construction/lookup failures."""


class DuplicateLevelError(LatticeError):
    pass


class CycleError(LatticeError):
    """The user order is not antisymmetric (a cycle of distinct levels)."""


class NoLubError(LatticeError):
    """Some pair of levels has no unique least upper bound."""


class NoExtremaError(LatticeError):
    """The order lacks a unique greatest or unique least element."""


class UnknownLevelError(LatticeError):
    pass


@dataclass(frozen=True)
class SecurityLattice:
    """Immutable lattice of security levels.

    `order` holds the closed relation as a set of (lower, upper) name pairs,
    reflexive pairs included. `lub_table` is total over levels x levels.
    """

    levels: frozenset[str]
    order: frozenset[tuple[str, str]]
    lub_table: dict[tuple[str, str], str] = field(compare=False)
    bottom: str = ""
    top: str = ""

    def check_level(self, a: str) -> None:
        if a not in self.levels:
            raise UnknownLevelError(f"unknown security level '{a}'")

    def leq(self, a: str, b: str) -> bool:
        self.check_level(a)
        self.check_level(b)
        return (a, b) in self.order

    def lub(self, a: str, b: str) -> str:
        self.check_level(a)
        self.check_level(b)
        return self.lub_table[(a, b)]

    def lub_all(self, levels) -> str:
        acc = self.bottom
        for s in levels:
            acc = self.lub(acc, s)
        return acc

    def sorted_levels(self) -> list[str]:
        """Levels in a deterministic linear extension (bottom first)."""
        return sorted(self.levels, key=lambda s: (sum((x, s) in self.order for x in self.levels), s))


def build_lattice(level_names: list[str], edges: list[tuple[str, str]]) -> SecurityLattice:
    """Validate and close a user-declared level poset into a SecurityLattice.

    Raises DuplicateLevelError, UnknownLevelError, CycleError, NoLubError or
    NoExtremaError when the declaration does not describe a bounded upper
    semi-lattice with unique top and bottom.
    """
    seen = set()
    for name in level_names:
        if not LEVEL_NAME_RE.match(name):
            raise DuplicateLevelError(f"illegal level name '{name}'")
        if name in seen:
            raise DuplicateLevelError(f"duplicate level '{name}'")
        seen.add(name)
    levels = frozenset(level_names)
    for lo, hi in edges:
        if lo not in levels:
            raise UnknownLevelError(f"edge endpoint '{lo}' not declared")
        if hi not in levels:
            raise UnknownLevelError(f"edge endpoint '{hi}' not declared")

    # Reflexive-transitive closure (Floyd-Warshall over the name set).
    reach = {(a, a) for a in levels}
    reach.update((lo, hi) for lo, hi in edges)
    for k in levels:
        for a in levels:
            if (a, k) not in reach:
                continue
            for b in levels:
                if (k, b) in reach:
                    reach.add((a, b))

    for a in levels:
        for b in levels:
            if a != b and (a, b) in reach and (b, a) in reach:
                raise CycleError(f"levels '{a}' and '{b}' order each other (cycle)")

    lub_table: dict[tuple[str, str], str] = {}
    for a in levels:
        for b in levels:
            uppers = [c for c in levels if (a, c) in reach and (b, c) in reach]
            least = [c for c in uppers if all((c, d) in reach for d in uppers)]
            if len(least) != 1:
                raise NoLubError(f"levels '{a}' and '{b}' have no unique least upper bound")
            lub_table[(a, b)] = least[0]

    tops = [c for c in levels if all((a, c) in reach for a in levels)]
    bots = [c for c in levels if all((c, a) in reach for a in levels)]
    if len(tops) != 1 or len(bots) != 1:
        raise NoExtremaError("lattice must have a unique top and a unique bottom level")

    return SecurityLattice(
        levels=levels,
        order=frozenset(reach),
        lub_table=lub_table,
        bottom=bots[0],
        top=tops[0],
    )
