import csv
import io
import json

import pytest

from mubound.cli import main
from mubound.config import ConfigError, RunConfig, ingest_curves


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_mu_check_text_and_json(capsys):
    code, out, _ = run(capsys, "mu-check", "--curve", "11a", "-p", "5", "-r", "1")
    assert code == 0 and "mu <= 1 certified" in out and "witness     n 1  a 1" in out
    code, out, _ = run(capsys, "mu-check", "--curve", "11a", "-p", "5", "-r", "0", "--format", "json")
    d = json.loads(out)
    assert code == 0 and d["certified"] is False and d["levels"] == [1, 2, 3]
    assert d["provenance"]["fingerprint"]


def test_theta(capsys):
    code, out, _ = run(capsys, "theta", "--curve", "11a", "-p", "5", "-n", "2", "-k", "3")
    assert code == 0
    assert "coeffs 85 85 85 85 65" in out and "mu~ 1 lambda~ 0" in out


def test_symbols(capsys):
    code, out, _ = run(capsys, "symbols", "--curve", "11a", "--den", "7", "--den", "1")
    assert code == 0
    assert "0/1 = 1/5" in out and "3/7 = -9/5" in out


def test_scan_deterministic_with_cache(capsys, tmp_path):
    args = ("scan-primes", "--curve", "11a", "--pmax", "50", "-r", "1", "--cache-dir", str(tmp_path))
    code1, out1, _ = run(capsys, *args)
    code2, out2, _ = run(capsys, *args)  # warm cache
    code3, out3, _ = run(capsys, *args[:-2], "--no-cache")
    assert code1 == code2 == code3 == 0
    assert out1 == out2 == out3
    rows = list(csv.DictReader(io.StringIO(out1)))
    assert [int(r["p"]) for r in rows] == [3, 5, 7, 13, 17, 23, 31, 37, 41, 43, 47]


def test_verify_bounds(capsys):
    code, out, _ = run(capsys, "verify-bounds", "--level", "11", "--rational", "2/3", "--count", "20")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 21
    assert rows[0] == {"r": "2/3", "length": "3", "lame_bound": "3.746531",
                       "max_coset_count": "1", "matrices": "3"}


def test_selfcheck(capsys):
    code, out, _ = run(capsys, "selfcheck", "--curve", "11a", "-p", "5", "--gauss", "5", "2")
    assert code == 0 and "FAIL" not in out and out.count("PASS") == 5


@pytest.mark.parametrize("argv", [
    ("mu-check", "--curve", "11a", "-p", "5", "--tol", "1e-3"),
    ("mu-check", "--curve", "11a", "-p", "5", "--nmax", "5"),
    ("mu-check", "--curve", "11a", "-p", "97", "--nmax", "3"),
    ("mu-check", "-p", "5"),
    ("mu-check", "--curve", "1,2,3", "-p", "5"),
    ("scan-primes", "--curve", "11a"),
    ("verify-bounds", "--level", "11", "--rational", "x"),
])
def test_config_errors_exit_2(capsys, argv):
    try:
        code = main(list(argv))
    except SystemExit as exc:  # argparse rejects missing required flags itself
        code = exc.code
    assert code == 2


def test_invariant_failure_exit_1(capsys, monkeypatch):
    from mubound import padic_l

    def broken(self, k):
        raise padic_l.CoherenceError("forced")
    monkeypatch.setattr(padic_l.PadicLFunction, "interpolation_check_trivial", broken)
    code, out, err = run(capsys, "selfcheck", "--curve", "11a", "-p", "5")
    assert code == 1 and "FAIL" in out


def test_ingest(tmp_path, caplog):
    f = tmp_path / "c.csv"
    f.write_text("a1,a2,a3,a4,a6,N,label\n0,-1,1,-10,-20,11,11a\n0,0,0,0,0,11,bad\n0,0,1,-1,0,37,37a\n")
    errors = []
    curves = ingest_curves(f, errors)
    assert [c.label for c in curves] == ["11a", "37a"]
    assert errors and errors[0][0] == 3
    f.write_text("a1,a2,a3,a4,a6,N\n")
    assert ingest_curves(f) == [] and "no curves" in caplog.text
    f.write_text("")
    with pytest.raises(ConfigError):
        ingest_curves(f)


def test_batch_file_cli(capsys, tmp_path):
    f = tmp_path / "c.csv"
    f.write_text("0,-1,1,-10,-20,11,11a\n0,0,1,-1,0,37,37a\n")
    code, out, _ = run(capsys, "scan-primes", "--curves", str(f), "--pmax", "7", "--nmax", "2")
    assert code == 0
    assert [line.split(",")[0] for line in out.splitlines()[1:]] == ["11a", "11a", "11a", "37a", "37a"]


def test_run_config_bounds():
    RunConfig(tol=1e-14, n_max=4, p=7).validate()
    for bad in (dict(tol=1e-15), dict(tol=1e-5), dict(n_max=0), dict(p=23, n_max=4), dict(r=-1)):
        with pytest.raises(ConfigError):
            RunConfig(**bad).validate()
