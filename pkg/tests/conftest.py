import pytest

from sifo.lattice import build_lattice

# Per-criterion verdict lines from the acceptance tests; echoed at the end of
# the run so they survive pytest's output capture.
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
from sifo.parser import parse_program
from sifo.syntax import ClassTable


@pytest.fixture(scope="session")
def two_level():
    return build_lattice(["low", "high"], [("low", "high")])


@pytest.fixture(scope="session")
def diamond():
    return build_lattice(
        ["bot", "l", "r", "top"],
        [("bot", "l"), ("bot", "r"), ("l", "top"), ("r", "top")])


CARD_SOURCE = """
class Card {
  low imm int number;
  high mut Balance blc;
  high imm Pin pin;
  low mut method low imm void setNumber(low imm int x) {
    this.number = x;
  }
}

class Balance {
  low imm int blc;
}

class Pin {
  low imm int pin;
}
"""

EMAIL_SOURCE = """
class Client {
  low imm int pubkey;
}

class Email {
  high imm int emailSignKey;
  high imm Boolean isSignatureVerified;
}

class Verifier {
  low mut method low imm void verifySignature(low mut Client client, low mut Email email) {
    low imm int pubkey = client.pubkey;
    high imm int privkey = email.emailSignKey;
    high imm Boolean isVerified = if (privkey == pubkey) { true } else { false };
    email.isSignatureVerified = isVerified;
  }
}
"""

SETNUMBER_SCRIPT = """
FieldAssignment @ eA low Card number
Variable @ eA1 this
Variable @ eA2 x
"""

SIGNATURE_SCRIPT = """
LocalDecl @ eA pubkey low imm int
FieldAccess @ eA1 low mut Client pubkey
Variable @ eA11 client
LocalDecl @ eA2 privkey high imm int
FieldAccess @ eA21 low mut Email emailSignKey
Variable @ eA211 email
LocalDecl @ eA22 isVerified high imm Boolean
Selection @ eA221 high
MethodCall @ eA2211 == high imm int ( high imm int ) -> high imm Boolean
Variable @ eA22111 privkey
SecurityPromotion @ eA22112 low
Variable @ eA22112 pubkey
SecurityPromotion @ eA2212 low
Literal @ eA2212 true
SecurityPromotion @ eA2213 low
Literal @ eA2213 false
FieldAssignment @ eA222 low Email isSignatureVerified
Variable @ eA2221 email
Variable @ eA2222 isVerified
"""


def table_from(source: str, lat) -> ClassTable:
    frag = parse_program(source)
    assert not frag.diagnostics, [str(d) for d in frag.diagnostics]
    return ClassTable(frag.declarations, lat.bottom)


@pytest.fixture(scope="session")
def card_table(two_level):
    return table_from(CARD_SOURCE, two_level)


@pytest.fixture(scope="session")
def email_table(two_level):
    return table_from(EMAIL_SOURCE, two_level)
