"""SIFO: a security-typed object-oriented language with hole-driven refinement.

The package has two halves. The checker half (`lattice`, `syntax`, `parser`,
`typechecker`) implements the standalone SIFO type system: security levels in
a user-defined lattice plus the mut/imm/capsule/read modifier discipline.
The builder half (`refiner`, `service`, `cli`) constructs method bodies
hole by hole; every completed construction re-typechecks in the standalone
checker.
"""

from sifo.lattice import SecurityLattice, build_lattice
from sifo.syntax import Modifier, SifoType, ClassTable, TypingContext

__all__ = [
    "SecurityLattice",
    "build_lattice",
    "Modifier",
    "SifoType",
    "ClassTable",
    "TypingContext",
]
