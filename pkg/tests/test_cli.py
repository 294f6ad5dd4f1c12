"""Command-line behaviour: reports, exit codes, determinism."""

import io
import math
from contextlib import redirect_stderr, redirect_stdout

from zetabf.cli import EXIT_DOMAIN, EXIT_OK, EXIT_PARSE, main


def run_cli(argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = main(argv)
    return code, out.getvalue(), err.getvalue()


def test_torsion_circle_report():
    code, out, _ = run_cli(["torsion", "--model", "circle",
                            "--theta", str(math.pi)])
    assert code == EXIT_OK
    assert "betti 0 0" in out
    assert "torsion 2" in out
    assert "schwarz 2" in out


def test_torsion_file_input(tmp_path):
    import cmath
    from zetabf.complexes import character_rep, circle_cell_complex, write_complex_file
    path = tmp_path / "circle.cplx"
    write_complex_file(path, circle_cell_complex(),
                       character_rep({"g": cmath.exp(1j * math.pi)}))
    code, out, _ = run_cli(["torsion", "--input", str(path)])
    assert code == EXIT_OK
    assert "torsion 2" in out


def test_torsion_non_acyclic_exit_code():
    code, _, err = run_cli(["torsion", "--model", "circle", "--theta", "0"])
    assert code == EXIT_DOMAIN
    assert "NotAcyclic" in err


def test_torsion_malformed_file(tmp_path):
    path = tmp_path / "broken.cplx"
    path.write_text("not a complex\n")
    code, _, err = run_cli(["torsion", "--input", str(path)])
    assert code == EXIT_PARSE
    assert "parse error" in err


def test_bf_reports_both_gauges():
    code, out, _ = run_cli(["bf", "--model", "cat", "--theta", str(math.pi),
                            "--samples", "4", "--sigma", "-1"])
    assert code == EXIT_OK
    assert "Z_metric 1.25" in out
    assert "Z_contraction 1.25" in out
    assert "Z_reeb_contraction 1.25" in out
    assert "max_relative_deviation" in out
    # monotone t column, constant Z column
    rows = [l.split() for l in out.splitlines() if l.startswith("  ")]
    ts = [float(r[0]) for r in rows]
    zs = {r[1] for r in rows}
    assert ts == sorted(ts)
    assert len(zs) <= 2      # identical up to printing of last-digit jitter


def test_bf_default_sigma_face():
    code, out, _ = run_cli(["bf", "--model", "cat", "--theta", str(math.pi),
                            "--samples", "3"])
    assert code == EXIT_OK
    assert "Z_metric 0.8" in out


def test_zeta_grid_and_closed_form(tmp_path):
    out_path = tmp_path / "grid.csv"
    code, _, _ = run_cli(["zeta", "--A", "2,1,1,1",
                          "--theta", str(math.pi),
                          "--lambda-start", "2", "--lambda-stop", "5",
                          "--lambda-steps", "3", "--J", "30",
                          "--closed-form", "--out", str(out_path)])
    assert code == EXIT_OK
    text = out_path.read_text()
    assert "closed_form_abs_zeta0_inverse 0.8" in text
    assert "fried_residual" in text
    assert "re_lambda,im_lambda,k" in text
    assert text.count("\n") >= 13


def test_zeta_flags_divergent_rows():
    code, out, _ = run_cli(["zeta", "--A", "2,1,1,1", "--theta", "0",
                            "--lambda-start", "0.3", "--lambda-stop", "0.3",
                            "--lambda-steps", "1", "--J", "20"])
    assert code == EXIT_OK
    assert "divergent" in out
    assert "ok" in out


def test_orbits_listing_and_spectrum(tmp_path):
    spec = tmp_path / "orbits.txt"
    code, out, _ = run_cli(["orbits", "--A", "2,1,1,1", "--J", "5",
                            "--theta", "0.5", "--out", str(spec)])
    assert code == EXIT_OK
    code2, out2, _ = run_cli(["orbits", "--input", str(spec)])
    assert code2 == EXIT_OK
    assert "records 5" in out2


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("model = circle\ntheta = 3.141592653589793\nsigma = 1\n")
    code, out, _ = run_cli(["torsion", "--config", str(cfg)])
    assert code == EXIT_OK
    assert "torsion 2" in out
    # flag overrides config
    code, out, _ = run_cli(["torsion", "--config", str(cfg),
                            "--theta", str(2 * math.pi / 3)])
    assert code == EXIT_OK
    assert "torsion 1.73" in out


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("mystery = 1\n")
    code, _, err = run_cli(["torsion", "--config", str(cfg)])
    assert code == EXIT_PARSE


def test_usage_error_maps_to_parse_exit():
    code, _, _ = run_cli(["torsion", "--model", "nonsense"])
    assert code == EXIT_PARSE


def test_byte_identical_reruns():
    argv = ["bf", "--model", "cat", "--theta", "2.0943951023931953",
            "--samples", "6", "--seed", "7"]
    _, out1, _ = run_cli(argv)
    _, out2, _ = run_cli(argv)
    assert out1 == out2


def test_verify_subset():
    code, out, _ = run_cli(["verify", "--criteria", "1,2"])
    assert code == EXIT_OK
    assert "[PASS] criterion  1" in out
    assert "2/2 criteria passed" in out
