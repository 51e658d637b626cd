from __future__ import annotations

import io
import json

import pytest

from percolata import InvariantError, cli


def run(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def records(text):
    return [json.loads(line) for line in text.splitlines() if line.strip()]


def test_parse_grid_inclusive():
    assert cli.parse_grid("0.4:0.7:0.05") == [0.4, 0.45, 0.5, 0.55, 0.6, 0.65, 0.7]
    assert cli.parse_grid("0.1:0.3:0.1") == [0.1, 0.2, 0.3]
    assert cli.parse_grid("0.5") == [0.5]
    assert cli.parse_grid("0.2,0.4") == [0.2, 0.4]
    with pytest.raises(ValueError):
        cli.parse_grid("0.1:0.3")
    with pytest.raises(ValueError):
        cli.parse_grid("0.5:0.1:0.1")
    assert cli.parse_int_grid("2:10") == list(range(2, 11))
    assert cli.parse_vertex("inf") == "inf" and cli.parse_vertex("3,0") == (3, 0)
    assert cli.parse_complex("0.7,0.05") == complex(0.7, 0.05)


def test_theta_sweep_records(capsys):
    code, out, _ = run(["theta-sweep", "--spec", "inf,inf", "--p", "0.4:0.7:0.05", "--radius", "12",
                        "--samples", "300", "--seed", "7"], capsys)
    recs = records(out)
    assert code == 0 and len(recs) == 7
    est = [r["estimate"] for r in recs]
    assert est == sorted(est)
    for r in recs:
        assert r["schema"] == cli.SCHEMA and r["schema_version"]["major"] == 1
        assert r["config"]["seed"] == 7 and r["config"]["radius"] == 12


def test_seed_is_mandatory(capsys):
    code, _, err = run(["theta-sweep", "--spec", "inf,inf", "--p", "0.5", "--radius", "5", "--samples", "3"], capsys)
    assert code == cli.EXIT_USAGE and "'seed'" in err


def test_usage_error_names_key(capsys):
    code, _, err = run(["ball", "--spec", "inf,inf", "--radius", "abc"], capsys)
    assert code == cli.EXIT_USAGE and "'radius'" in err
    code, _, err = run(["ball", "--spec", "inf,inf"], capsys)
    assert code == cli.EXIT_USAGE and "'radius'" in err


def test_reproducible_bytes(capsys):
    args = ["two-point", "--spec", "inf,inf", "--p", "0.6", "--distances", "1,2", "--radius", "8",
            "--samples", "50", "--seed", "3"]
    _, a, _ = run(args, capsys)
    _, b, _ = run(args, capsys)
    assert a == b and len(records(a)) == 3


def test_oracle_star(capsys):
    code, out, _ = run(["oracle", "--spec", "inf,inf", "--radius", "1", "--event", "connect", "--p", "0.5"], capsys)
    rec = records(out)[0]
    assert code == 0 and rec["coefficients"] == [0, 4, 6, 4, 1] and rec["values"]["0.5"] == 0.9375


def test_csv_output(capsys):
    code, out, _ = run(["ball", "--spec", "inf,inf", "--radius", "2", "--format", "csv"], capsys)
    lines = out.strip().splitlines()
    assert code == 0 and lines[0].startswith("command,") and len(lines) == 2
    assert "13" in lines[1]


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# ball run\nspec = inf,inf\nradius = 3\n")
    _, out, _ = run(["ball", "--config", str(cfg)], capsys)
    assert records(out)[0]["n_vertices"] == 25
    _, out, _ = run(["ball", "--config", str(cfg), "--radius", "1"], capsys)
    assert records(out)[0]["n_vertices"] == 5
    cfg.write_text("spec = inf,inf\nradius = 3\ncolour = blue\n")
    code, _, err = run(["ball", "--config", str(cfg)], capsys)
    assert code == cli.EXIT_USAGE and "'colour'" in err


def test_output_file(tmp_path, capsys):
    path = tmp_path / "out.jsonl"
    code, out, _ = run(["locality-radius", "--spec", "inf,inf,8", "--output", str(path)], capsys)
    assert code == 0 and out == ""
    assert records(path.read_text())[0]["locality_radius"] == 3


def test_invariant_failure_exit_code(monkeypatch, capsys):
    def boom(cfg):
        raise InvariantError("synthetic", witness={"x": 1})

    monkeypatch.setitem(cli.HANDLERS, "ball", boom)
    code, _, err = run(["ball", "--spec", "inf,inf", "--radius", "1"], capsys)
    assert code == cli.EXIT_INVARIANT and "synthetic" in err


def test_threads_env(monkeypatch, capsys):
    monkeypatch.setenv("PERCOLATA_THREADS", "3")
    code, out, _ = run(["theta-sweep", "--spec", "inf,inf", "--p", "0.3,0.6,0.9", "--radius", "6",
                        "--samples", "100", "--seed", "1"], capsys)
    monkeypatch.setenv("PERCOLATA_THREADS", "1")
    _, out1, _ = run(["theta-sweep", "--spec", "inf,inf", "--p", "0.3,0.6,0.9", "--radius", "6",
                      "--samples", "100", "--seed", "1"], capsys)
    assert code == 0 and out == out1


def test_cutsets_interfaces_series(capsys):
    code, out, _ = run(["cutsets", "--spec", "inf,inf", "--radius", "3", "--v", "inf", "--max-size", "4"], capsys)
    assert code == 0 and all(r["is_minimal"] for r in records(out))
    code, out, _ = run(["interfaces", "--spec", "inf,inf", "--radius", "2", "--scales", "toy", "--mode", "series",
                        "--z", "0.7,0.05", "--n-max", "11"], capsys)
    assert code == 0 and not records(out)[0]["truncated"]
    code, out, _ = run(["interfaces", "--spec", "inf,inf", "--radius", "5", "--scales", "toy", "--mode", "census",
                        "--p", "0.7", "--samples", "5", "--seed", "2"], capsys)
    assert code == 0 and len(records(out)) == 5
    code, out, _ = run(["series", "--spec", "inf,inf", "--radius", "2", "--scales", "toy", "--n-max", "6",
                        "--p", "0.7"], capsys)
    assert code == 0 and records(out)[4]["values"]["0.7"] > 0
    code, _, err = run(["interfaces", "--spec", "inf,inf", "--radius", "2", "--mode", "bogus"], capsys)
    assert code == cli.EXIT_USAGE and "'mode'" in err


def test_write_records_json_sorted():
    buf = io.StringIO()
    cli.write_records([{"b": 1, "a": [1, 2]}], "json", buf)
    assert buf.getvalue() == '{"a": [1, 2], "b": 1}\n'
