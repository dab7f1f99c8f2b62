import json
import math

import pytest

from levyheat.harness import ConfigError, load_preset, parse_config, run
from levyheat.harness.cli import main
from levyheat.harness.plotdata import emit_plotdata, psi_table
from levyheat.harness.presets import PRESETS
from levyheat.harness.runner import OUT_ENV

SANDWICH = """\
[measure]
family = pure_stable
alpha = 1

[sweep]
t_list = 0.5, 2

[checks]
symbol.psi_sandwich =
"""

SWEEP = """\
[measure]
family = stable_log
alpha = 1.2
kappa = 1
beta = 0.5

[sweep]
t_list = 0.1, 1, 10
x_extent = 50

[checks]
symbol.tables =
density.sweep =
bounds.upper_main =

[output]
formats = csv, report, plotdata
"""


STRICT = """\
[measure]
family = stable_log
alpha = 1.2
kappa = 1
beta = 0.5

[checks]
symbol.psi_sandwich = band=1e-9
"""


def test_psi_sandwich_only_run(tmp_path):
    m = run(parse_config(SANDWICH), out_dir=tmp_path)
    assert m.passed and m.exit_code == 0
    rec = m.checks[0]
    assert rec.name == "symbol.psi_sandwich" and rec.constants["C8"] > 0
    saved = json.loads((tmp_path / "manifest.json").read_text())
    assert saved["passed"] is True


def test_empty_checks_gives_manifest_only(tmp_path):
    cfg = parse_config("[measure]\nfamily = pure_stable\nalpha = 1\n[checks]\n")
    m = run(cfg, out_dir=tmp_path)
    assert m.checks == [] and m.passed
    assert sorted(p.name for p in tmp_path.iterdir()) == ["checks.csv", "manifest.json", "report.txt"]


def test_unknown_check_is_schema_error_with_line():
    text = SANDWICH + "symbol.nonexistent =\n"
    with pytest.raises(ConfigError) as exc:
        parse_config(text, "x.ini")
    assert exc.value.line == 10 and "x.ini:10" in str(exc.value)


@pytest.mark.parametrize("text,line", [
    ("[measure]\nfamily = pure_stable\nalpha = 3\n[checks]\n", 3),
    ("[measure]\nfamily = pure_stable\nalpha = 1\ncolour = red\n[checks]\n", 4),
    ("[measure]\nfamily = pure_stable\nalpha = 1\n[sweep]\nt_list = 1, -2\n[checks]\n", 5),
    ("[measure]\nfamily = pure_stable\nalpha = 1\n[bogus]\n", 4),
    ("[measure]\nfamily = pure_stable\nalpha = 1\n[checks]\nsymbol.psi_sandwich = band=-1\n", 5),
    ("[measure]\nfamily = pure_stable\nalpha = 1\n[output]\nformats = csv, pdf\n[checks]\n", 5),
])
def test_config_errors_carry_lines(text, line):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert exc.value.line == line


def test_unknown_option_rejected_before_running(tmp_path):
    text = SANDWICH.replace("symbol.psi_sandwich =", "symbol.psi_sandwich = nosuch=1")
    with pytest.raises(ConfigError):
        parse_config(text)


def test_config_hash_ignores_output_dir():
    a = parse_config(SANDWICH + "[output]\ndirectory = /tmp/a\n")
    b = parse_config(SANDWICH + "[output]\ndirectory = /tmp/b\n")
    c = parse_config(SANDWICH.replace("0.5, 2", "0.5, 3"))
    assert a.config_hash() == b.config_hash() != c.config_hash()


def test_presets_parse():
    for name in PRESETS:
        cfg = load_preset(name)
        assert cfg.checks


def test_determinism_and_threads(tmp_path):
    cfg = parse_config(SWEEP)
    run(cfg, out_dir=tmp_path / "a")
    run(cfg, out_dir=tmp_path / "b")
    run(cfg, out_dir=tmp_path / "c", threads=2)
    csvs = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*.csv"))
    assert len(csvs) > 5
    for rel in csvs:
        a = (tmp_path / "a" / rel).read_bytes()
        assert a == (tmp_path / "b" / rel).read_bytes()
        assert a == (tmp_path / "c" / rel).read_bytes()


def test_tol_scale_can_flip_outcome(tmp_path):
    cfg = parse_config(STRICT)
    strict = run(cfg, out_dir=tmp_path / "s", write=False)
    loose = run(cfg, out_dir=tmp_path / "l", write=False, tol_scale=1e9)
    assert strict.exit_code == 1 and loose.exit_code == 0


def test_plotdata_columns(tmp_path, closed_cauchy, stablelog_ev):
    from levyheat import bounds as B
    from levyheat.density import invert_density

    g = invert_density(closed_cauchy, 1.0, extent=5.0)
    (p,) = emit_plotdata(g, tmp_path, "cauchy")
    lines = p.read_text().splitlines()
    assert lines[0] == "# x p" and len(lines) == len(g.values) + 1
    x, v = map(float, lines[1].split())
    assert x == g.x[0] and v == g.values[0]

    sweep = B.density_sweep(stablelog_ev, [0.1, 1.0], extent=20.0)
    rep = B.fit_upper_constant(B.upper_main(stablelog_ev.spec_.default_f(1), 1), sweep, ev=stablelog_ev)
    files = emit_plotdata(rep, tmp_path, "upper")
    assert len(files) == 2
    head, first = files[0].read_text().splitlines()[:2]
    assert head == "# x density envelope ratio"
    x, dens, env, ratio = map(float, first.split())
    assert math.isclose(ratio, dens / env, rel_tol=1e-12)

    (t,) = emit_plotdata(psi_table([1.0, 2.0], [3.0, 4.0], [2.0, 2.5], 0.5), tmp_path, "psi")
    assert t.read_text().splitlines()[:2] == ["# r psi two_H C8_H", "1 3 4 1"]


def test_cli_exit_codes_and_env(tmp_path, monkeypatch, capsys):
    cfg = tmp_path / "ok.ini"
    cfg.write_text(SANDWICH)
    monkeypatch.setenv(OUT_ENV, str(tmp_path / "envout"))
    assert main(["symbol", "--config", str(cfg), "-q"]) == 0
    assert (tmp_path / "envout" / "manifest.json").exists()

    assert main(["symbol", "--config", str(cfg), "--out", str(tmp_path / "flag"), "-q"]) == 0
    assert (tmp_path / "flag" / "symbol_tables.psi.csv").exists()

    bad = tmp_path / "bad.ini"
    bad.write_text(SANDWICH + "symbol.nonexistent =\n")
    assert main(["validate", "--config", str(bad)]) == 2
    assert "bad.ini:10" in capsys.readouterr().err

    strict = tmp_path / "strict.ini"
    strict.write_text(STRICT)
    assert main(["validate", "--config", str(strict), "--out", str(tmp_path / "s"), "-q"]) == 1


def test_cli_bounds_without_bound_checks(tmp_path):
    cfg = tmp_path / "ok.ini"
    cfg.write_text(SANDWICH)
    assert main(["bounds", "--config", str(cfg), "--out", str(tmp_path)]) == 2


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_preset_passes(tmp_path, name):
    m = run(load_preset(name), out_dir=tmp_path)
    failing = [(c.name, c.summary) for c in m.checks if c.status != "pass"]
    assert not failing
