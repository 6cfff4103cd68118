"""Flat ``key = value`` run configuration.

Scalars are one per line; ``#`` starts a comment. Matrices are blocks::

    matrix.h.re = [
      0.5  -2
      -2   -0.5
    ]

whose entries are anything ``complex()`` accepts. Two-level models use the
shorthand keys; N-level models give ``matrix.h.re`` (and optionally
``matrix.h.im``) together with either ``matrix.r`` or ``decay_rates``.
"""
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DimensionError, ValidationError
from .liouvillian import DecayRelaxation, ExplicitRelaxation, ModelSpec, validate
from .twolevel import TwoLevelParams, to_model

# config key -> TwoLevelParams field
TWO_LEVEL_KEYS = {
    "pump_1": "lambda1",
    "pump_2": "lambda2",
    "decay_1": "gamma1",
    "decay_2": "gamma2",
    "coherence_decay": "gamma",
    "detuning": "omega",
    "coupling_v": "v",
}
PUMP21_KEYS = ("pump_21_re", "pump_21_im")
GRID_DEFAULTS = {"t_end": 20.0, "samples": 2000, "dt": 1e-3}
MATRIX_KEYS = (
    "matrix.h.re",
    "matrix.h.im",
    "matrix.r",
    "matrix.pump",
    "matrix.coherence",
    "matrix.init.re",
    "matrix.init.im",
)
OTHER_KEYS = ("init_rho", "out_dir", "decay_rates")
KNOWN_KEYS = set(TWO_LEVEL_KEYS) | set(PUMP21_KEYS) | set(GRID_DEFAULTS) | set(MATRIX_KEYS) | set(OTHER_KEYS)


@dataclass(frozen=True)
class RunConfig:
    model: ModelSpec
    t_end: float
    samples: int
    dt: float
    initial_state: np.ndarray
    out_dir: Path
    params: TwoLevelParams | None = None  # set for two-level shorthand input

    @property
    def n(self):
        return self.model.n


def _tokens(text, line):
    out = []
    for tok in text.replace(",", " ").split():
        try:
            out.append(complex(tok))
        except ValueError:
            raise ConfigError(f"cannot read {tok!r} as a number", line) from None
    return out


def _scan(text):
    """``{key: (value, line)}`` where block values are lists of row lists."""
    entries = {}
    lines = text.splitlines()
    i = 0
    while i < len(lines):
        lineno = i + 1
        raw = lines[i].split("#", 1)[0].strip()
        i += 1
        if not raw:
            continue
        if "=" not in raw:
            raise ConfigError(f"expected 'key = value', got {raw!r}", lineno)
        key, value = (s.strip() for s in raw.split("=", 1))
        if not key:
            raise ConfigError("empty key", lineno)
        if key in entries:
            raise ConfigError(f"duplicate key {key!r} (first set on line {entries[key][1]})", lineno)
        if value == "[":
            rows = []
            while True:
                if i >= len(lines):
                    raise ConfigError(f"block {key!r} is not closed with ']'", lineno)
                body = lines[i].split("#", 1)[0].strip()
                i += 1
                if body == "]":
                    break
                if body:
                    rows.append(_tokens(body, i))
            entries[key] = (rows, lineno)
        else:
            if not value:
                raise ConfigError(f"key {key!r} has no value", lineno)
            entries[key] = (value, lineno)
    return entries


def _real(entries, key, default=None):
    if key not in entries:
        return default
    value, line = entries[key]
    if isinstance(value, list):
        raise ConfigError(f"{key} must be a single number", line)
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"{key} must be a number, got {value!r}", line) from None


def _matrix(entries, key, n=None):
    value, line = entries[key]
    if not isinstance(value, list):
        raise ConfigError(f"{key} must be a '[' ... ']' block", line)
    widths = {len(r) for r in value}
    if not value or len(widths) != 1:
        raise ConfigError(f"{key} rows must be non-empty and of equal length", line)
    m = np.array(value, dtype=complex)
    if m.shape[0] != m.shape[1]:
        raise ConfigError(f"{key} must be square, got {m.shape[0]}x{m.shape[1]}", line)
    if n is not None and m.shape[0] != n:
        raise ConfigError(f"{key} must be {n}x{n}, got {m.shape[0]}x{m.shape[0]}", line)
    return m


def _two_level(entries):
    missing = [k for k in TWO_LEVEL_KEYS if k not in entries]
    if missing:
        raise ConfigError("missing required keys: " + ", ".join(missing))
    raw = {field: _real(entries, key) for key, field in TWO_LEVEL_KEYS.items()}
    raw["lambda21"] = complex(_real(entries, "pump_21_re", 0.0), _real(entries, "pump_21_im", 0.0))
    params = TwoLevelParams(**raw)
    return to_model(params), params


def _n_level(entries):
    h = _matrix(entries, "matrix.h.re")
    n = h.shape[0]
    if "matrix.h.im" in entries:
        h = h + 1j * _matrix(entries, "matrix.h.im", n)
    pump = _matrix(entries, "matrix.pump", n) if "matrix.pump" in entries else np.zeros((n, n))
    if "matrix.r" in entries:
        if "decay_rates" in entries:
            raise ConfigError("give either matrix.r or decay_rates, not both", entries["decay_rates"][1])
        r = _matrix(entries, "matrix.r", n * n)
        relax = ExplicitRelaxation(r)
    elif "decay_rates" in entries:
        value, line = entries["decay_rates"]
        decay = np.array(_tokens(value, line) if isinstance(value, str) else sum(value, []))
        if decay.size != n or np.any(decay.imag != 0):
            raise ConfigError(f"decay_rates needs {n} real values", line)
        decay = decay.real
        if "matrix.coherence" in entries:
            coh = _matrix(entries, "matrix.coherence", n)
            if np.any(coh.imag != 0):
                raise ConfigError("matrix.coherence must be real", entries["matrix.coherence"][1])
            relax = DecayRelaxation(decay, coh.real)
        else:
            relax = DecayRelaxation.lifetime_limited(decay)
    else:
        raise ConfigError("missing required keys: matrix.r or decay_rates")
    model = ModelSpec(h, relax, pump)
    report = validate(model)
    if not report.ok:
        raise ValidationError(report.failures)
    return model


def _initial_state(entries, n):
    mode = entries.get("init_rho", ("zero", None))[0]
    line = entries.get("init_rho", (None, None))[1]
    has_block = "matrix.init.re" in entries or "matrix.init.im" in entries
    if mode == "zero":
        rho = np.zeros((n, n), dtype=complex)
    elif mode == "excited":
        rho = np.zeros((n, n), dtype=complex)
        rho[n - 1, n - 1] = 1.0
    elif mode == "custom":
        if not has_block:
            raise ConfigError("init_rho = custom needs matrix.init.re and/or matrix.init.im", line)
        rho = np.zeros((n, n), dtype=complex)
        if "matrix.init.re" in entries:
            rho = rho + _matrix(entries, "matrix.init.re", n)
        if "matrix.init.im" in entries:
            rho = rho + 1j * _matrix(entries, "matrix.init.im", n)
    else:
        raise ConfigError(f"init_rho must be zero, excited or custom, got {mode!r}", line)
    if mode != "custom" and has_block:
        raise ConfigError("matrix.init.* blocks need init_rho = custom")
    return rho


def parse_config(text, base_dir="."):
    """Parse and validate a run configuration.

    Raises
    ------
    ConfigError
        Syntax problems (with line numbers), unknown or missing keys.
    ValidationError
        Physically invalid model parameters.
    """
    entries = _scan(text)
    unknown = sorted(k for k in entries if k not in KNOWN_KEYS)
    if unknown:
        raise ConfigError("unknown keys: " + ", ".join(unknown))
    n_level = any(k.startswith("matrix.h") for k in entries)
    shorthand = [k for k in list(TWO_LEVEL_KEYS) + list(PUMP21_KEYS) if k in entries]
    try:
        if n_level:
            if shorthand:
                raise ConfigError("two-level keys cannot be mixed with matrix.h: " + ", ".join(shorthand))
            model, params = _n_level(entries), None
        else:
            stray = [k for k in ("matrix.r", "matrix.pump", "matrix.coherence", "decay_rates") if k in entries]
            if stray:
                raise ConfigError("missing required key matrix.h.re for " + ", ".join(stray))
            model, params = _two_level(entries)
    except DimensionError as exc:
        raise ConfigError(str(exc)) from None

    t_end = _real(entries, "t_end", GRID_DEFAULTS["t_end"])
    samples = _real(entries, "samples", GRID_DEFAULTS["samples"])
    dt = _real(entries, "dt", GRID_DEFAULTS["dt"])
    if not t_end > 0:
        raise ConfigError("t_end must be > 0", entries["t_end"][1])
    if samples != int(samples) or samples < 2:
        raise ConfigError("samples must be an integer >= 2", entries["samples"][1])
    if not dt > 0:
        raise ConfigError("dt must be > 0", entries["dt"][1])
    out_dir = Path(base_dir) / entries.get("out_dir", (".", None))[0]
    return RunConfig(
        model=model,
        t_end=t_end,
        samples=int(samples),
        dt=dt,
        initial_state=_initial_state(entries, model.n),
        out_dir=out_dir,
        params=params,
    )


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text, base_dir=path.parent)
