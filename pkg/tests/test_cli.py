import pytest
from click.testing import CliRunner

from sifo.cli import main

from conftest import CARD_SOURCE, EMAIL_SOURCE, SETNUMBER_SCRIPT

LATTICE = "level low\nlevel high\nflow low -> high\n"


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def files(tmp_path):
    lat = tmp_path / "lattice.lat"
    lat.write_text(LATTICE)
    card = tmp_path / "card.sifo"
    card.write_text(CARD_SOURCE)
    email = tmp_path / "email.sifo"
    email.write_text(EMAIL_SOURCE)
    script = tmp_path / "setNumber.ifbc"
    script.write_text(SETNUMBER_SCRIPT)
    return tmp_path


def test_check_ok(runner, files):
    r = runner.invoke(main, ["check", str(files / "card.sifo"),
                             str(files / "email.sifo"),
                             "--lattice", str(files / "lattice.lat")])
    assert r.exit_code == 0, r.output + r.stderr


def test_check_rejects(runner, files):
    bad = files / "bad.sifo"
    bad.write_text(CARD_SOURCE + """
class Bad {
  low mut method low imm void go(low mut Card c, high imm int secret) {
    c.number = secret;
  }
}
""")
    r = runner.invoke(main, ["check", str(bad),
                             "--lattice", str(files / "lattice.lat")])
    assert r.exit_code == 1
    assert "FlowViolation" in r.stderr


def test_check_missing_lattice(runner, files):
    r = runner.invoke(main, ["check", str(files / "card.sifo"),
                             "--lattice", str(files / "nope.lat")])
    assert r.exit_code == 2 or r.exit_code == 1
    assert r.exit_code == 2


def test_check_syntax_error(runner, files):
    bad = files / "broken.sifo"
    bad.write_text("class Broken { low low }")
    r = runner.invoke(main, ["check", str(bad),
                             "--lattice", str(files / "lattice.lat")])
    assert r.exit_code == 1
    assert "SyntaxError" in r.stderr


def test_refine_prints_method(runner, files):
    r = runner.invoke(main, [
        "refine", str(files / "card.sifo"),
        "--script", str(files / "setNumber.ifbc"),
        "--method", "Card.setNumber",
        "--lattice", str(files / "lattice.lat")])
    assert r.exit_code == 0, r.output + r.stderr
    assert "this.number = x;" in r.output


def test_refine_bad_step_exit_1(runner, files):
    bad = files / "bad.ifbc"
    bad.write_text("Variable @ eA x\n")
    r = runner.invoke(main, [
        "refine", str(files / "card.sifo"),
        "--script", str(bad),
        "--method", "Card.setNumber",
        "--lattice", str(files / "lattice.lat")])
    assert r.exit_code == 1
    assert "step 1" in r.stderr
    assert "Variable" in r.stderr


def test_refine_incomplete_exit_1(runner, files):
    partial = files / "partial.ifbc"
    partial.write_text("FieldAssignment @ eA low Card number\n")
    r = runner.invoke(main, [
        "refine", str(files / "card.sifo"),
        "--script", str(partial),
        "--method", "Card.setNumber",
        "--lattice", str(files / "lattice.lat")])
    assert r.exit_code == 1
    assert "incomplete" in r.stderr


def test_refine_unknown_rule_exit_2(runner, files):
    bad = files / "bad.ifbc"
    bad.write_text("Frobnicate @ eA x\n")
    r = runner.invoke(main, [
        "refine", str(files / "card.sifo"),
        "--script", str(bad),
        "--method", "Card.setNumber",
        "--lattice", str(files / "lattice.lat")])
    assert r.exit_code == 2


def test_refine_bad_method_arg(runner, files):
    r = runner.invoke(main, [
        "refine", str(files / "card.sifo"),
        "--script", str(files / "setNumber.ifbc"),
        "--method", "setNumber",
        "--lattice", str(files / "lattice.lat")])
    assert r.exit_code == 2


def test_fuzz_smoke(runner):
    r = runner.invoke(main, ["fuzz", "--seed", "3", "--iterations", "40",
                             "--max-depth", "12"])
    assert r.exit_code == 0, r.output + r.stderr
    assert "completed" in r.output


def test_serve_corrupt_workspace(runner, tmp_path):
    r = runner.invoke(main, ["serve", "--workspace", str(tmp_path)])
    assert r.exit_code == 2
    assert "corrupt workspace" in r.stderr
