import csv
from pathlib import Path

import numpy as np
import pytest

from pumped_liouville.cli import fmt, main
from pumped_liouville.config import parse_config
from pumped_liouville.errors import ConfigError, ValidationError

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

CASE1 = """\
# reference case 1
pump_1 = 0
pump_2 = 1.0
decay_1 = 1.0
decay_2 = 0
coherence_decay = 0.5
detuning = 0
coupling_v = 2.0
t_end = 20
samples = 2000
dt = 0.001
"""


def _write(tmp_path, text, name="model.conf"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def _read(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array([[float(x) if x else np.nan for x in r] for r in rows[1:]])


def test_parse_case1():
    cfg = parse_config(CASE1)
    assert cfg.params.lambda2 == 1.0 and cfg.params.v == 2.0
    assert np.array_equal(cfg.initial_state, np.zeros((2, 2)))
    assert (cfg.t_end, cfg.samples, cfg.dt) == (20.0, 2000, 0.001)


def test_parse_empty_lists_missing_keys():
    with pytest.raises(ConfigError) as info:
        parse_config("")
    assert "coupling_v" in str(info.value) and "decay_1" in str(info.value)


def test_negative_coupling_accepted():
    assert parse_config(CASE1.replace("coupling_v = 2.0", "coupling_v = -2.0")).params.v == -2.0


def test_unknown_keys_listed():
    with pytest.raises(ConfigError) as info:
        parse_config(CASE1 + "colour = red\nflavour = 2\n")
    assert "colour, flavour" in str(info.value)


def test_syntax_error_has_line_number():
    with pytest.raises(ConfigError) as info:
        parse_config("pump_1 = 0\njust words\n")
    assert info.value.line == 2 and "line 2" in str(info.value)


def test_bad_number_and_duplicates():
    with pytest.raises(ConfigError):
        parse_config(CASE1.replace("pump_2 = 1.0", "pump_2 = one"))
    with pytest.raises(ConfigError) as info:
        parse_config(CASE1 + "pump_2 = 3\n")
    assert "duplicate" in str(info.value)


def test_grid_validation():
    for bad in ("t_end = 0", "samples = 1", "samples = 2.5", "dt = -1"):
        key = bad.split()[0]
        text = "\n".join(l for l in CASE1.splitlines() if not l.startswith(key)) + "\n" + bad + "\n"
        with pytest.raises(ConfigError):
            parse_config(text)


def test_validation_forwarded():
    with pytest.raises(ValidationError):
        parse_config(CASE1.replace("coherence_decay = 0.5", "coherence_decay = 0.1"))


def test_init_modes():
    assert parse_config(CASE1 + "init_rho = excited\n").initial_state[1, 1] == 1.0
    custom = CASE1 + "init_rho = custom\nmatrix.init.re = [\n 0.5 0\n 0 0.5\n]\n"
    assert np.allclose(parse_config(custom).initial_state, 0.5 * np.eye(2))
    with pytest.raises(ConfigError):
        parse_config(CASE1 + "init_rho = custom\n")
    with pytest.raises(ConfigError):
        parse_config(CASE1 + "init_rho = hot\n")


def test_n_level_config():
    cfg = parse_config((CONFIGS / "three_level.conf").read_text())
    assert cfg.n == 3 and cfg.params is None
    assert np.allclose(np.diag(cfg.model.pump).real, [0, 0.2, 1.0])


def test_n_level_block_errors():
    with pytest.raises(ConfigError) as info:
        parse_config("matrix.h.re = [\n1 0\n0 1\n")
    assert "not closed" in str(info.value)
    with pytest.raises(ConfigError):
        parse_config("matrix.h.re = [\n1 0\n0\n]\ndecay_rates = 1 1\n")
    with pytest.raises(ConfigError):
        parse_config("matrix.h.re = [\n1 0\n0 1\n]\ndecay_rates = 1 1 1\n")
    with pytest.raises(ConfigError):
        parse_config("matrix.h.re = [\n1 0\n0 1\n]\n")
    with pytest.raises(ConfigError):
        parse_config(CASE1 + "matrix.h.re = [\n1 0\n0 1\n]\n")


def test_explicit_relaxation_config():
    text = "matrix.h.re = [\n0 1\n1 0\n]\nmatrix.r = [\n" + "\n".join(
        " ".join("-1" if i == j else "0" for j in range(4)) for i in range(4)
    ) + "\n]\nmatrix.pump = [\n1 0\n0 0\n]\n"
    cfg = parse_config(text)
    assert np.array_equal(cfg.model.relaxation.matrix, -np.eye(4))


def test_fmt():
    assert fmt(-0.0) == "0"
    assert fmt(1 / 3) == "0.333333333333"
    assert fmt(float("inf")) == "inf"


def test_run_case1(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", "--config", _write(tmp_path, CASE1), "--out", str(out)]) == 0
    header, traj = _read(out / "trajectory.csv")
    assert header[:3] == ["t", "re_rho_1_1", "im_rho_1_1"]
    assert header[-2:] == ["total_population", "abs_rho_1_2"]
    total = traj[:, header.index("total_population")]
    assert abs(total[0]) <= 1e-12
    assert np.diff(total).min() >= -1e-12
    assert abs(total[-1] - 2.0625) <= 1e-4
    r11 = traj[:, header.index("re_rho_1_1")]
    r22 = traj[:, header.index("re_rho_2_2")]
    coh = traj[:, header.index("abs_rho_1_2")]
    assert np.all(coh <= np.sqrt(np.clip(r11 * r22, 0, None)) + 1e-6)
    h2, lyap = _read(out / "lyapunov.csv")
    assert h2 == ["t", "m_omega_normalized", "s_omega"]
    assert lyap[0, 1] == 1.0 and lyap[0, 2] == 0.0
    assert np.diff(lyap[:, 1]).max() <= 1e-10 and lyap[-1, 1] <= 1e-6
    _, delta = _read(out / "method_delta.csv")
    assert delta[:, 1].max() <= 1e-6
    assert "2.0625" in capsys.readouterr().out


def test_run_is_byte_reproducible(tmp_path):
    cfg = _write(tmp_path, CASE1.replace("samples = 2000", "samples = 50"))
    main(["run", "--config", cfg, "--out", str(tmp_path / "a")])
    main(["run", "--config", cfg, "--out", str(tmp_path / "b")])
    for name in ("trajectory.csv", "lyapunov.csv", "method_delta.csv"):
        a = (tmp_path / "a" / name).read_bytes()
        assert a == (tmp_path / "b" / name).read_bytes()
        assert b"\r" not in a


def test_run_from_steady_state_is_flat(tmp_path):
    text = CASE1.replace("samples = 2000", "samples = 20") + (
        "init_rho = custom\nmatrix.init.re = [\n1 0\n0 1.0625\n]\n"
        "matrix.init.im = [\n0 0.25\n-0.25 0\n]\n"
    )
    assert main(["run", "--config", _write(tmp_path, text), "--out", str(tmp_path)]) == 0
    header, traj = _read(tmp_path / "trajectory.csv")
    assert np.ptp(traj[:, 1:], axis=0).max() <= 1e-12
    _, lyap = _read(tmp_path / "lyapunov.csv")
    assert np.all(lyap[:, 1] == 0)


def test_run_case3_approaches_steady_state(tmp_path):
    assert main(["run", "--config", str(CONFIGS / "case3.conf"), "--out", str(tmp_path)]) == 0
    header, traj = _read(tmp_path / "trajectory.csv")
    last = traj[-1]
    assert last[header.index("re_rho_1_1")] == pytest.approx(1.0, abs=1e-6)
    assert last[header.index("re_rho_2_2")] == pytest.approx(1.0, abs=1e-6)
    assert traj[0, header.index("re_rho_2_2")] == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize(
    "case_id, expected",
    [(2, ["-0.5-4.09449778328j", "-0.5+4.09449778328j", "-0.377884901528+0j", "-0.622115098472+0j"]),
     (4, ["-1-11.1803398875j", "-1+11.1803398875j", "-1+0j"])],
)
def test_spectrum(case_id, expected, capsys):
    assert main(["spectrum", "--config", str(CONFIGS / f"case{case_id}.conf")]) == 0
    out = capsys.readouterr().out
    for z in expected:
        assert z in out
    assert "similarity residual" in out and "level-2-first order" in out


def test_spectrum_non_decaying(tmp_path, capsys):
    text = CASE1.replace("coupling_v = 2.0", "coupling_v = 0")
    assert main(["spectrum", "--config", _write(tmp_path, text)]) == 4
    cap = capsys.readouterr()
    assert "eigenvalues:" in cap.out and "NonDecayingModeError" in cap.err


def test_sweep_case3_is_zero(tmp_path):
    args = ["sweep", "--config", str(CONFIGS / "case3.conf"), "--out", str(tmp_path),
            "--param", "coupling_v", "--from", "0", "--to", "50", "--steps", "11"]
    assert main(args) == 0
    header, rows = _read(tmp_path / "sweep.csv")
    assert header == ["coupling_v", "difference_solve", "difference_analytic", "abs_deviation"]
    assert np.abs(rows[:, 1]).max() <= 1e-12


def test_sweep_trends(tmp_path):
    base = CASE1.replace("decay_2 = 0", "decay_2 = 0.5").replace("coherence_decay = 0.5", "coherence_decay = 1.0")
    cfg = _write(tmp_path, base)
    main(["sweep", "--config", cfg, "--out", str(tmp_path / "v"), "--param", "coupling_v",
          "--from", "0.01", "--to", "50", "--steps", "30"])
    _, v = _read(tmp_path / "v" / "sweep.csv")
    assert np.all(np.diff(v[:, 1]) < 0) and v[-1, 1] < 0.01 * v[0, 1]
    assert np.nanmax(v[:, 3]) <= 1e-9
    main(["sweep", "--config", cfg, "--out", str(tmp_path / "g"), "--param", "coherence_decay",
          "--from", "1", "--to", "1000", "--steps", "20"])
    _, g = _read(tmp_path / "g" / "sweep.csv")
    assert np.all(np.diff(g[:, 1]) > 0) and 1.95 < g[-1, 1] < 2.0


def test_sweep_blank_analytic_when_undefined(tmp_path):
    args = ["sweep", "--config", _write(tmp_path, CASE1), "--out", str(tmp_path),
            "--param", "coupling_v", "--from", "1", "--to", "2", "--steps", "2"]
    assert main(args) == 0
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[1] == "1,0.25,,"


def test_sweep_errors(tmp_path):
    cfg = _write(tmp_path, CASE1)
    base = ["sweep", "--config", cfg, "--out", str(tmp_path), "--from", "0", "--to", "1"]
    assert main(base + ["--param", "colour", "--steps", "3"]) == 2
    assert main(base + ["--param", "coupling_v", "--steps", "1"]) == 2
    assert main(base[:-4] + ["--from", "0.6", "--to", "0.1", "--param", "coherence_decay", "--steps", "2"]) == 3


def test_ensemble_verify(tmp_path, capsys):
    cfg = _write(tmp_path, CASE1.replace("t_end = 20", "t_end = 5"))
    assert main(["ensemble-verify", "--config", cfg, "--quad-step", "1e-3"]) == 0
    assert "PASS" in capsys.readouterr().out


def test_ensemble_verify_unsupported(tmp_path, capsys):
    cfg = _write(tmp_path, CASE1.replace("coherence_decay = 0.5", "coherence_decay = 0.9"))
    assert main(["ensemble-verify", "--config", cfg]) == 3
    assert "lifetime" in capsys.readouterr().err


def test_ensemble_verify_zero_pump(tmp_path, capsys):
    text = CASE1.replace("pump_2 = 1.0", "pump_2 = 0").replace("t_end = 20", "t_end = 2")
    assert main(["ensemble-verify", "--config", _write(tmp_path, text)]) == 0
    out = capsys.readouterr().out
    residual = float(out.split("residual:")[1].split()[0])
    assert residual <= 1e-6


def test_ensemble_verify_threshold_miss(tmp_path):
    cfg = _write(tmp_path, CASE1.replace("t_end = 20", "t_end = 2"))
    assert main(["ensemble-verify", "--config", cfg, "--quad-step", "0.2"]) == 5


def test_fixtures_command(capsys):
    assert main(["fixtures"]) == 0
    out = capsys.readouterr().out
    assert out.count("case ") == 4 and out.strip().endswith("within 1e-6")


def test_missing_config_file(tmp_path):
    assert main(["run", "--config", str(tmp_path / "nope.conf")]) == 2
