import itertools

import pytest

from sifo.parser import parse_program
from sifo.syntax import (
    ClassTable, Modifier, SifoType, TypingContext, Var, FieldAccess,
)
from sifo.typechecker import (
    Checker, TypeIssue, field_arrow, meth_types, raise_type, subtype,
)

from conftest import CARD_SOURCE, table_from

M = Modifier


def t(level, mdf, cls):
    return SifoType(level, M(mdf), cls)


# ---------------------------------------------------------------------------
# Subtyping

def test_subtype_examples(card_table):
    ct = card_table
    assert subtype(t("low", "capsule", "Card"), t("low", "mut", "Card"), ct)
    assert subtype(t("low", "mut", "Card"), t("low", "read", "Card"), ct)
    assert not subtype(t("low", "imm", "Card"), t("low", "mut", "Card"), ct)
    # the level never moves under subtyping
    assert not subtype(t("low", "capsule", "Card"), t("high", "mut", "Card"), ct)
    assert not subtype(t("high", "imm", "Card"), t("low", "imm", "Card"), ct)


# ---------------------------------------------------------------------------
# Field arrow

ARROW_TABLE = {
    (M.MUT, M.MUT): M.MUT, (M.MUT, M.IMM): M.IMM,
    (M.CAPSULE, M.MUT): M.MUT, (M.CAPSULE, M.IMM): M.IMM,
    (M.IMM, M.MUT): M.IMM, (M.IMM, M.IMM): M.IMM,
    (M.READ, M.MUT): M.READ, (M.READ, M.IMM): M.IMM,
}


def test_field_arrow_table():
    for (recv, fld), expected in ARROW_TABLE.items():
        assert field_arrow(recv, fld) == expected


def test_field_arrow_imm_absorbs():
    for recv in M:
        assert field_arrow(recv, M.IMM) == M.IMM
        assert field_arrow(M.IMM, recv) == M.IMM


# ---------------------------------------------------------------------------
# raiseType

def test_raise_type(two_level):
    assert raise_type(t("low", "imm", "int"), "high", two_level) == t("high", "imm", "int")
    assert raise_type(t("high", "imm", "int"), "low", two_level) == t("high", "imm", "int")
    assert raise_type(t("low", "mut", "C"), "low", two_level) == t("low", "mut", "C")


def test_raise_type_incomparable(diamond):
    with pytest.raises(TypeIssue) as exc:
        raise_type(t("l", "imm", "int"), "r", diamond)
    assert exc.value.code == "IncomparableLevels"


# ---------------------------------------------------------------------------
# methTypes

def test_meth_types_set_number(card_table, two_level):
    sigs = meth_types(card_table, two_level, "Card", "setNumber")
    recvs = {(s.receiver.level, s.receiver.modifier) for s in sigs}
    assert ("low", M.MUT) in recvs
    assert ("low", M.CAPSULE) in recvs  # case 2: [mut\capsule]
    assert ("high", M.MUT) in recvs  # raised signature
    assert ("high", M.CAPSULE) in recvs
    for s in sigs:
        # raising keeps receiver/param/return levels in lockstep
        assert s.receiver.level == s.params[0].level == s.ret.level
    assert len(sigs) == len(set(sigs))  # deduplicated
    assert len(sigs) <= len(two_level.levels) * 3


def test_meth_types_bound(card_table, two_level, diamond, email_table):
    for ct, lat in ((card_table, two_level), (email_table, two_level)):
        for d in ct.user_decls():
            for md in d.methods:
                sigs = meth_types(ct, lat, d.name, md.header.name)
                assert len(sigs) <= len(lat.levels) * 3


def test_meth_types_unknown(card_table, two_level):
    with pytest.raises(TypeIssue) as exc:
        meth_types(card_table, two_level, "Card", "nope")
    assert exc.value.code == "UnknownMethod"


# ---------------------------------------------------------------------------
# Synthesis examples

def test_type_of_chained_access(card_table, two_level):
    chk = Checker(card_table, two_level)
    ctx = TypingContext((("c", t("low", "mut", "Card")),))
    e = FieldAccess(FieldAccess(Var("c"), "blc"), "blc")
    assert chk.type_of(ctx, e) == t("high", "imm", "int")
    assert chk.type_of(ctx, FieldAccess(Var("c"), "blc")) == t("high", "mut", "Balance")
    assert chk.type_of(ctx, FieldAccess(Var("c"), "number")) == t("low", "imm", "int")


def test_read_receiver_demotes_mut_field(card_table, two_level):
    chk = Checker(card_table, two_level)
    ctx = TypingContext((("c", t("low", "read", "Card")),))
    assert chk.type_of(ctx, FieldAccess(Var("c"), "blc")) == t("high", "read", "Balance")


def test_sec_prom_never_on_mut_or_read(card_table, two_level):
    chk = Checker(card_table, two_level)
    for mdf in ("mut", "read"):
        ctx = TypingContext((("x", t("low", mdf, "Balance")),))
        with pytest.raises(TypeIssue) as exc:
            chk.check_against(ctx, Var("x"), t("high", mdf, "Balance"))
        assert exc.value.code in ("FlowViolation", "PromotionFailed")


def test_sec_prom_on_imm_and_capsule(card_table, two_level):
    chk = Checker(card_table, two_level)
    ctx = TypingContext((("x", t("low", "imm", "Pin")),
                         ("y", t("low", "capsule", "Balance")),))
    chk.check_against(ctx, Var("x"), t("high", "imm", "Pin"))
    chk.check_against(ctx, Var("y"), t("high", "mut", "Balance"))


# ---------------------------------------------------------------------------
# Listing-line corpus: each line checked inside a harness method with
# c: low mut Card and highInt: high imm int in scope.

HARNESS = """
class Harness {{
  low mut method low imm void run(low mut Card c, high imm int highInt) {{
    {line}
    unit;
  }}
}}
"""


def run_line(line: str, lat) -> list[TypeIssue]:
    src = CARD_SOURCE + HARNESS.format(line=line)
    ct = table_from(src, lat)
    return Checker(ct, lat).check_program()


ACCEPT_LINES = [
    "high mut Balance blc = c.blc;",
    "high imm int blc = c.blc.blc;",
    "c.blc.blc = highInt;",
    "c.blc.blc = c.number;",
    "low mut Balance newBlc = new low Balance(0);",
    "low mut Balance newBlc = new low Balance(0); newBlc.blc = 10;",
    "low capsule Balance capsBlc = new low Balance(0);",
    "low capsule Balance capsBlc = new low Balance(0); c.blc = capsBlc;",
    "low imm Pin immPin = new low Pin(1234);",
    "low imm Pin immPin = new low Pin(1234); c.pin = immPin;",
]

REJECT_LINES = [
    ("low imm int blc = c.blc.blc;", "FlowViolation"),
    ("c.number = highInt;", "FlowViolation"),
    ("low mut Balance newBlc = new low Balance(0); c.blc = newBlc;",
     "FlowViolation"),
    ("low imm Pin immPin = new low Pin(1234); immPin.pin = 5678;",
     "ModifierViolation"),
]


@pytest.mark.parametrize("line", ACCEPT_LINES)
def test_listing_line_accepts(line, two_level):
    assert run_line(line, two_level) == []


@pytest.mark.parametrize("line,code", REJECT_LINES)
def test_listing_line_rejects(line, code, two_level):
    issues = run_line(line, two_level)
    assert issues, line
    assert issues[0].code == code


# ---------------------------------------------------------------------------
# Calls

CALL_SOURCE = CARD_SOURCE + """
class Caller {
  low mut method low imm void go(low mut Card c, high mut Card hc, low imm int n) {
    c.setNumber(n);
  }
  high mut method low imm void leak(high mut Card hc) {
    unit;
  }
}
"""


def test_call_accepts(two_level):
    ct = table_from(CALL_SOURCE, two_level)
    assert Checker(ct, two_level).check_program() == []


def test_call_high_receiver_needs_high_args(card_table, two_level):
    src = CARD_SOURCE + """
class Caller {
  low mut method low imm void go(high mut Card hc, low imm int n) {
    hc.setNumber(n);
    unit;
  }
}
"""
    ct = table_from(src, two_level)
    # n is imm so it security-promotes to the raised high signature: accepted.
    assert Checker(ct, two_level).check_program() == []


def test_call_return_below_receiver_rejected(two_level):
    src = CARD_SOURCE + """
class Leaky {
  high mut method low imm int get() {
    return 0;
  }
}

class Caller {
  low mut method low imm int go(high mut Leaky l) {
    return l.get();
  }
}
"""
    ct = table_from(src, two_level)
    issues = Checker(ct, two_level).check_program()
    assert issues
    assert any(i.code == "FlowViolation" for i in issues)


def test_mut_param_below_receiver_rejected(two_level):
    src = CARD_SOURCE + """
class Sink {
  high mut method high imm void grab(low mut Balance b) {
    unit;
  }
}

class Caller {
  low mut method low imm void go(high mut Sink s, low mut Balance b) {
    s.grab(b);
    unit;
  }
}
"""
    ct = table_from(src, two_level)
    issues = Checker(ct, two_level).check_program()
    assert issues
    assert any(i.code == "FlowViolation" for i in issues)


# ---------------------------------------------------------------------------
# Constructors

def test_new_result_is_mut(card_table, two_level):
    chk = Checker(card_table, two_level)
    from sifo.syntax import Literal, New
    e = New("low", "Balance", (Literal("int", 0),))
    assert chk.type_of(TypingContext(()), e) == t("low", "mut", "Balance")
    e2 = New("high", "Balance", (Literal("int", 0),))
    assert chk.type_of(TypingContext(()), e2) == t("high", "mut", "Balance")


def test_new_arity_checked(card_table, two_level):
    from sifo.syntax import New
    chk = Checker(card_table, two_level)
    with pytest.raises(TypeIssue) as exc:
        chk.type_of(TypingContext(()), New("low", "Balance", ()))
    assert exc.value.code == "ArityMismatch"


# ---------------------------------------------------------------------------
# Guards and restriction

def test_guard_must_be_boolean(two_level):
    src = CARD_SOURCE + """
class G {
  low mut method low imm void go(low imm int n) {
    if (n) { unit; } else { unit; }
  }
}
"""
    ct = table_from(src, two_level)
    issues = Checker(ct, two_level).check_program()
    assert issues and issues[0].code == "GuardNotBoolean"


def test_high_guard_blocks_low_mut_write(two_level):
    src = CARD_SOURCE + """
class G {
  low mut method low imm void go(low mut Balance b, high imm Boolean g) {
    if (g) { b.blc = 1; } else { unit; }
  }
}
"""
    ct = table_from(src, two_level)
    issues = Checker(ct, two_level).check_program()
    assert issues and issues[0].code == "ModifierViolation"


def test_low_guard_allows_low_mut_write(two_level):
    src = CARD_SOURCE + """
class G {
  low mut method low imm void go(low mut Balance b, low imm Boolean g) {
    if (g) { b.blc = 1; } else { unit; }
  }
}
"""
    ct = table_from(src, two_level)
    assert Checker(ct, two_level).check_program() == []


def test_while_restricts_like_if(two_level):
    src = CARD_SOURCE + """
class G {
  low mut method low imm void go(low mut Balance b, high imm Boolean g) {
    while (g) { b.blc = 1; }
  }
}
"""
    ct = table_from(src, two_level)
    issues = Checker(ct, two_level).check_program()
    assert issues and issues[0].code == "ModifierViolation"


# ---------------------------------------------------------------------------
# Declassification

def test_declassify_imm(two_level):
    src = CARD_SOURCE + """
class D {
  low mut method low imm int reveal(high imm int secret) {
    return declassify(secret);
  }
}
"""
    ct = table_from(src, two_level)
    assert Checker(ct, two_level).check_program() == []


def test_declassify_mut_rejected(two_level):
    src = CARD_SOURCE + """
class D {
  low mut method low mut Balance reveal(high mut Balance b) {
    return declassify(b);
  }
}
"""
    ct = table_from(src, two_level)
    issues = Checker(ct, two_level).check_program()
    assert issues and issues[0].code == "DeclassifyIllegal"


# ---------------------------------------------------------------------------
# Interfaces

def test_interface_obligation(two_level):
    src = """
interface Greeter {
  low mut method low imm int greet(low imm int x);
}

class Nice implements Greeter {
  low mut method low imm int greet(low imm int x) {
    return x;
  }
}
"""
    ct = table_from(src, two_level)
    assert Checker(ct, two_level).check_program() == []


def test_interface_missing_method(two_level):
    src = """
interface Greeter {
  low mut method low imm int greet(low imm int x);
}

class Rude implements Greeter {
  low imm int f;
}
"""
    ct = table_from(src, two_level)
    issues = Checker(ct, two_level).check_program()
    assert issues and issues[0].code == "InterfaceUnimplemented"


# ---------------------------------------------------------------------------
# Synthesis minimality: the synthesized type reaches every other valid typing
# via subsumption and promotion.

def test_synthesis_minimal(card_table, two_level):
    chk = Checker(card_table, two_level)
    ctx = TypingContext((("c", t("low", "mut", "Card")),))
    e = FieldAccess(Var("c"), "number")
    principal = chk.type_of(ctx, e)
    accepted = []
    for level in two_level.sorted_levels():
        for mdf in M:
            cand = t(level, mdf, "int")
            try:
                chk.check_against(ctx, e, cand)
                accepted.append(cand)
            except TypeIssue:
                pass
    assert principal in accepted
    for cand in accepted:
        assert chk._promotes_to(principal, cand)
