import json

import pytest

from panelcurve import fixture_path
from panelcurve.cli import build_parser, main
from panelcurve.config import KEYS


def test_help_lists_config_keys(capsys):
    with pytest.raises(SystemExit) as info:
        main(["run", "--help"])
    assert info.value.code == 0
    out = capsys.readouterr().out
    for key in KEYS:
        assert key in out


def test_run_writes_report(tmp_path):
    out = tmp_path / "r.txt"
    assert main(["run", fixture_path(), "-o", str(out)]) == 0
    assert "FixedEffects" in out.read_text()


def test_run_twice_identical(tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    main(["run", fixture_path(), "-o", str(a), "--unitroot-enabled", "false"])
    main(["run", fixture_path(), "-o", str(b), "--unitroot-enabled", "false"])
    assert a.read_bytes() == b.read_bytes()


def test_report_subcommand_rerenders(tmp_path):
    j, t1, t2 = tmp_path / "r.json", tmp_path / "a.txt", tmp_path / "b.txt"
    args = ["--modes", "backward", "--unitroot-enabled", "off"]
    assert main(["run", fixture_path(), "-f", "json", "-o", str(j)] + args) == 0
    assert main(["run", fixture_path(), "-o", str(t1)] + args) == 0
    assert main(["report", str(j), "-o", str(t2)]) == 0
    assert t1.read_bytes() == t2.read_bytes()


def test_subcommand_sections(tmp_path):
    out = tmp_path / "u.json"
    assert main(["unitroot", fixture_path(), "-f", "json", "-o", str(out)]) == 0
    tree = json.loads(out.read_text())
    assert tree["unit_root"] and tree["estimates"] is None
    assert main(["estimate", fixture_path(), "-f", "json", "-o", str(out)]) == 0
    tree = json.loads(out.read_text())
    assert tree["estimates"] and tree["spec_tests"] is None and tree["unit_root"] is None
    assert main(["spectest", fixture_path(), "-f", "json", "-o", str(out)]) == 0
    tree = json.loads(out.read_text())
    assert tree["model_choice"]["BL"]["selected"] == "FixedEffects"


def test_config_file_and_set_precedence(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('modes = ["forward"]\nlevel = 0.01\nunitroot.enabled = false\n')
    out = tmp_path / "o.json"
    assert main(["spectest", fixture_path(), "-c", str(cfg), "--set", "level=0.02",
                 "-f", "json", "-o", str(out)]) == 0
    tree = json.loads(out.read_text())
    assert list(tree["model_choice"]) == ["FL"]
    assert tree["model_choice"]["FL"]["level"] == 0.02


@pytest.mark.parametrize("argv, code", [
    (["run", "--level", "0.7"], 2),
    (["run", "--set", "nonsense.key=1"], 2),
    (["run", "--set", "level"], 2),
    (["run", "--max-lag", "abc"], 2),
])
def test_config_errors_exit_2(argv, code, capsys):
    argv = argv[:1] + [fixture_path()] + argv[1:]
    assert main(argv) == code
    assert "error" in capsys.readouterr().err


def test_missing_input_exits_3(tmp_path, capsys):
    assert main(["run", str(tmp_path / "none.csv")]) == 3
    bad = tmp_path / "bad.csv"
    bad.write_text("entity,period,cpi,expected_cpi,unemployment,gdp_growth\nUS,1990Q1,x,1,1,1\n")
    assert main(["run", str(bad)]) == 3
    assert "line 2" in capsys.readouterr().err


def test_no_input_is_config_error():
    assert main(["run"]) == 2


def test_numerical_error_exits_4(tmp_path, capsys):
    # expected inflation constant within each entity: the within transform wipes it out
    rows = ["entity,period,cpi,expected_cpi,unemployment,gdp_growth"]
    for i, e in enumerate(("AA", "BB", "CC")):
        for t in range(8):
            cpi = 100 * 1.01 ** t + (t % 3)
            rows.append(f"{e},{2000 + t // 4}Q{t % 4 + 1},{cpi},{0.01 * (i + 1)},"
                        f"{5 + (t * (i + 2)) % 5 / 3},{(-1) ** (t + i)}")
    path = tmp_path / "flat.csv"
    path.write_text("\n".join(rows) + "\n")
    assert main(["estimate", str(path), "--modes", "forward"]) == 4
    assert "annihilated" in capsys.readouterr().err


def test_simulate(tmp_path, capsys):
    out = tmp_path / "s.csv"
    assert main(["simulate", "--seed", "3", "--entities", "2", "--periods", "6", "-o", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 1 + 12
    assert main(["simulate", "--regime", "--entities", "2", "--periods", "6"]) == 0
    assert capsys.readouterr().out.startswith("entity,period")
    assert main(["simulate", "--sigma-u", "-1"]) == 2


def test_parser_requires_command():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])
