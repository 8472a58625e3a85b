import csv
import json
import math

import pytest

from cpmom.cli import (
    EXIT_CONVERGENCE,
    EXIT_NUMERIC,
    EXIT_OK,
    EXIT_USAGE,
    main,
)


def _run_json(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_exact_json(capsys):
    code, payload = _run_json(
        capsys, ["exact", "--group", "so", "--n", "1", "--k", "1", "--beta", "1"]
    )
    assert code == EXIT_OK
    assert payload["command"] == "exact"
    assert payload["value"] == pytest.approx(4.0, rel=1e-9)
    assert payload["config"]["group"] == "so"
    assert payload["config"]["n"] == 1


def test_exact_csv(capsys):
    code = main(["exact", "--group", "sp", "--n", "2", "--format", "csv"])
    assert code == EXIT_OK
    rows = list(csv.reader(capsys.readouterr().out.splitlines()))
    assert rows[0] == ["group", "N", "k", "beta", "value"]
    assert float(rows[1][4]) == pytest.approx(6.0, rel=1e-9)


def test_exact_output_file(tmp_path, capsys):
    path = tmp_path / "out.json"
    code = main(["exact", "--group", "so", "--n", "2", "--output", str(path)])
    assert code == EXIT_OK
    assert capsys.readouterr().out == ""
    payload = json.loads(path.read_text())
    assert payload["value"] == pytest.approx(6.0, rel=1e-9)


def test_mc_reproducible(capsys):
    argv = ["mc", "--group", "sp", "--n", "1", "--samples", "400", "--seed", "7"]
    code1, p1 = _run_json(capsys, argv)
    code2, p2 = _run_json(capsys, argv)
    assert code1 == code2 == EXIT_OK
    assert p1["mean"] == p2["mean"]
    assert p1["std_error"] > 0
    assert abs(p1["mean"] - 3.0) < 6 * p1["std_error"]


def test_fit_command(capsys):
    code, payload = _run_json(
        capsys, ["fit", "--group", "sp", "--n-range", "1:4"]
    )
    assert code == EXIT_OK
    assert payload["degree"] == 2
    assert payload["coefficient"] == pytest.approx(0.5, rel=1e-9)


def test_predict_with_supplied_gamma(capsys):
    code, payload = _run_json(
        capsys,
        [
            "predict",
            "--group",
            "sp",
            "--dmax",
            "10000",
            "--gamma-value",
            "0.5",
            "--prime-cutoff",
            "200",
        ],
    )
    assert code == EXIT_OK
    assert payload["gamma"] == 0.5
    # prediction = A(0) * gamma * (log D / 2)^2
    log_half = math.log(10000.0) / 2.0
    assert payload["prediction"] / (0.5 * log_half ** 2) == pytest.approx(
        0.29722, abs=5e-3
    )


def test_usage_errors_exit_one(capsys):
    assert main(["exact", "--group", "zz", "--n", "1"]) == EXIT_USAGE
    assert main(["exact", "--n", "1"]) == EXIT_USAGE
    assert main(["nonsense"]) == EXIT_USAGE
    capsys.readouterr()


def test_unsupported_order_is_usage_error(capsys):
    code = main(["exact", "--group", "sp", "--n", "1", "--k", "2", "--beta", "2"])
    assert code == EXIT_USAGE
    capsys.readouterr()


def test_numeric_failure_exit_two(capsys):
    code = main(
        ["gamma", "--group", "sp", "--nodes", "4", "--doubling-rtol", "1e-12"]
    )
    assert code == EXIT_NUMERIC
    capsys.readouterr()


def test_validate_quick(capsys):
    code, payload = _run_json(capsys, ["validate", "--quick"])
    assert code in (EXIT_OK, EXIT_NUMERIC, EXIT_CONVERGENCE)
    assert payload["passed"] == (code == EXIT_OK)
    names = [c["name"] for c in payload["checks"]]
    assert any("anchor" in n for n in names)
    assert code == EXIT_OK
