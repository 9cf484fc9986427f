from __future__ import annotations

import io
import json
import math
import subprocess
import sys

import pytest

from leibniz_euler.cli import EXIT_FAIL, EXIT_PASS, EXIT_USAGE, run

HALF_PI = repr(math.pi / 2)


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


# --- eval -------------------------------------------------------------------------------


def test_eval_example():
    code, out, _ = call("eval", "st((dx+dx^2)/dx)")
    assert (code, out) == (EXIT_PASS, "1\n")


def test_eval_json_shape():
    code, out, _ = call("eval", "geq(3 + 7*dx, 3)", "--format", "json")
    doc = json.loads(out)
    assert code == EXIT_PASS
    assert doc == {"input": "geq(3 + 7*dx, 3)", "value": "true", "kind": "boolean", "diagnostics": []}


def test_eval_parse_error_is_usage():
    code, out, err = call("eval", "tlh(5 + eps")
    assert code == EXIT_USAGE and out == ""
    assert "expected )" in err
    # the caret sits under the end of the input
    lines = err.splitlines()
    assert lines[2].index("^") == lines[1].index("tlh") + len("tlh(5 + eps")


def test_eval_evaluation_error_is_failure():
    code, out, err = call("eval", "st(omega)", "--format", "json")
    assert code == EXIT_FAIL
    doc = json.loads(out)
    assert doc["kind"] == "error" and doc["diagnostics"][0]["span"] == {"start": 3, "end": 8}
    assert "UnlimitedInput" in err


def test_eval_constants():
    code, out, _ = call("eval", "dy/dx", "--const", "dy=3*eps")
    assert (code, out) == (EXIT_PASS, "3\n")


def test_eval_stdin(monkeypatch):
    monkeypatch.setattr(sys, "stdin", io.StringIO("1 + eps\n\nomega*eps\n"))
    code, out, _ = call("eval")
    assert code == EXIT_PASS and out.splitlines() == ["1 + eps", "1"]


def test_eval_truncation_flag():
    _, out, _ = call("eval", "1/(1 - eps)", "--truncation", "3")
    assert out.strip() == "1 + eps + eps^2 + eps^3"


# --- derivations -------------------------------------------------------------------------


def test_sine_product_json_pass():
    code, out, _ = call("derive", "sine-product", "--x", HALF_PI, "--factors", "100", "--format", "json")
    doc = json.loads(out)
    assert code == EXIT_PASS and doc["overall"] == "pass"
    assert [s["id"] for s in doc["steps"]][-1] == "final"
    for step in doc["steps"]:
        assert set(step) == {"id", "anchor", "claim", "residual", "bound", "pass"}


def test_json_is_deterministic():
    argv = ("derive", "sine-product", "--x", "1.0", "--factors", "50", "--format", "json")
    assert call(*argv)[1] == call(*argv)[1]
    argv = ("derive", "exp", "--format", "json")
    assert call(*argv)[1] == call(*argv)[1]


def test_derive_exp_text():
    code, out, _ = call("derive", "exp", "--k", "1", "--z", "1/2")
    assert code == EXIT_PASS and "overall: pass" in out


def test_tight_tolerance_fails_derivation():
    code, _, _ = call("derive", "exp", "--tol", "cumulative=1e-12")
    assert code == EXIT_FAIL


def test_wallis_and_basel():
    code, out, _ = call("wallis", "--N", "2")
    assert code == EXIT_PASS and "1.42222" in out
    code, out, _ = call("basel", "--N", "3", "--format", "json")
    assert code == EXIT_PASS and json.loads(out)["overall"] == "pass"
    code, _, _ = call("basel", "--N", "10", "--route", "coefficient-comparison")
    assert code == EXIT_PASS


def test_lhopital():
    code, out, _ = call("lhopital", "--x", repr(math.e))
    assert code == EXIT_PASS and "shadow -1.0" in out
    assert call("lhopital", "--x", "1")[0] == EXIT_USAGE


def test_integrate_square():
    code, out, _ = call("integrate", "--integrand", "x^2", "--expect", "1/3", "--format", "json")
    doc = json.loads(out)
    assert code == EXIT_PASS and abs(doc["shadow"] - 1 / 3) <= 1e-6 and doc["order"] >= 2
    assert call("integrate", "--integrand", "x^2", "--expect", "0.3")[0] == EXIT_FAIL


# --- checks ------------------------------------------------------------------------------


def test_econv_harmonic_fails():
    code, out, _ = call("check", "econv", "--rule", "harmonic")
    assert code == EXIT_FAIL
    assert "(ii)  fail" in out


def test_econv_passes():
    assert call("check", "econv", "--rule", "geometric")[0] == EXIT_PASS
    assert call("check", "econv", "--rule", "wallis-pair")[0] == EXIT_PASS
    assert call("check", "econv", "--rule", "sine-factor", "--x", HALF_PI)[0] == EXIT_PASS


def test_econv_inline_rule():
    code, out, _ = call("check", "econv", "--rule", "1/k^2", "--format", "json")
    assert json.loads(out)["condition_ii"]["status"] == "pass"


def test_transfer():
    assert call("check", "transfer", "--rule-a", "1/k^2", "--rule-b", "1/k^2")[0] == EXIT_PASS
    code, out, _ = call("check", "transfer", "--rule-a", "harmonic", "--rule-b", "harmonic")
    assert code == EXIT_FAIL and "not applicable" in out


def test_factorization():
    code, out, _ = call("check", "factorization", "--i", "4", "--a", "2", "--b", "1", "--format", "json")
    doc = json.loads(out)
    assert code == EXIT_PASS and doc["exact"] and doc["residual"] == "0"
    code, out, _ = call("check", "factorization", "--i", "12", "--a", "1.1", "--b", "0.9", "--mode", "approx")
    assert code == EXIT_PASS


def test_step4():
    code, out, _ = call("check", "step4", "--x", "1", "--factors", "20", "--schedule", "10:2:6")
    assert code == EXIT_PASS and "gamma = 0.148679" in out


def test_archimedean():
    code, out, _ = call("check", "archimedean", "2", "3", "--format", "json")
    assert code == EXIT_PASS and json.loads(out)["archimedean"] is True
    assert call("check", "archimedean", "eps", "1", "--expect", "false")[0] == EXIT_PASS
    assert call("check", "archimedean", "eps", "1", "--expect", "true")[0] == EXIT_FAIL


# --- configuration and usage ------------------------------------------------------------


@pytest.mark.parametrize("argv", [
    ("wallis", "--N", "0"),
    ("eval", "1", "--truncation", "1"),
    ("eval", "1", "--schedule", "10:2:3"),
    ("eval", "1", "--schedule", "ten"),
    ("derive", "exp", "--tol", "bogus=1"),
    ("derive", "exp", "--tol", "cumulative=-1"),
    ("check", "econv", "--rule", "sin(k)"),
    ("frobnicate",),
    ("eval", "1", "--config", "/nonexistent/file"),
])
def test_usage_errors(argv):
    code, _, err = call(*argv)
    assert code == EXIT_USAGE and err


def test_help_exits_zero():
    assert call("--help")[0] == EXIT_PASS


def test_config_file_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# shared settings\ntruncation = 2\nformat = json\ntol.cumulative = 1e-12\ntol.gap = 1\n")
    _, out, _ = call("eval", "1/(1 - eps)", "--config", str(cfg))
    assert json.loads(out)["value"] == "1 + eps + eps^2"
    # flags beat the file
    assert call("eval", "1", "--config", str(cfg), "--truncation", "3", "--format", "text")[1] == "1\n"
    assert call("derive", "exp", "--config", str(cfg))[0] == EXIT_FAIL
    assert call("derive", "exp", "--config", str(cfg), "--tol", "cumulative=1e-4")[0] == EXIT_PASS


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("colour = blue\n")
    assert call("eval", "1", "--config", str(cfg))[0] == EXIT_USAGE


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "leibniz_euler", "eval", "st((dx+dx^2)/dx)"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout == "1\n"
