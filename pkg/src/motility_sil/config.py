"""Strict experiment configuration: flat ``key = value`` lines, dotted keys.

Grammar: one ``key = value`` per line; blank lines and ``#`` comments are
ignored; keys are dotted lowercase identifiers.  Unknown keys are an error
(every offending key is reported), as are missing required keys and values
that fail their type or range check.
"""

from __future__ import annotations

from dataclasses import dataclass

__all__ = ["ExperimentConfig", "ConfigError", "parse_config", "parse_config_text",
           "EXPERIMENTS"]


class ConfigError(ValueError):
    pass


def _bool(s: str) -> bool:
    low = s.strip().lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _float_list(s: str):
    return tuple(float(tok) for tok in s.replace(";", ",").split(",") if tok.strip())


def _breakpoints(s: str):
    """``t0:F0; t1:F1; ...`` pairs."""
    out = []
    for tok in s.split(";"):
        tok = tok.strip()
        if not tok:
            continue
        t_str, f_str = tok.split(":")
        out.append((float(t_str), float(f_str)))
    return tuple(out)


# key -> (type converter, default); default None means "optional, unset",
# _REQUIRED means the experiment must receive it.
_REQUIRED = object()

_COMMON = {
    "experiment": (str, _REQUIRED),
    "output_dir": (str, None),
    "figures": (_bool, True),
    "potential.kind": (str, "symmetric-quartic"),
    "potential.coefficients": (_float_list, None),
    "grid.half_width": (float, 20.0),
    "grid.n_points": (int, 20001),
    "seed": (int, 0),
}

EXPERIMENTS = {
    "kernel": {
        "beta": (float, 1.0),
        "v.start": (float, -3.0),
        "v.stop": (float, 3.0),
        "v.count": (int, 121),
        "v.psi0": (float, 0.0),
    },
    "sil-roots": {
        "beta": (float, 150.0),
        "f.start": (float, _REQUIRED),
        "f.stop": (float, None),
        "f.count": (int, 1),
        "v_scan": (float, 10.0),
        "dv": (float, 0.02),
        "stability_method": (str, "monotone"),
    },
    "tw": {
        "beta.list": (_float_list, _REQUIRED),
        "v_scan": (float, 10.0),
    },
    "beta-crit": {
        "beta.lo": (float, 1.0),
        "beta.hi": (float, 1e5),
        "tol": (float, 1e-3),
    },
    "hysteresis": {
        "beta": (float, 150.0),
        "schedule.kind": (str, "reference-sweep"),
        "schedule.breakpoints": (_breakpoints, None),
        "samples_per_leg": (int, 2000),
        "capture_radius": (float, 0.2),
        "v_scan": (float, 25.0),
        "v_start": (float, None),
    },
    "stability": {
        "beta.list": (_float_list, (50.0, 150.0)),
        "v.start": (float, -2.9),
        "v.stop": (float, 1.35),
        "v.count": (int, 20),
        # dense eigensolves need a deliberately coarse companion grid
        "grid.n_points": (int, 1401),
    },
    "pde1d": {
        "eps": (float, 0.02),
        "beta": (float, 0.0),
        "f.const": (float, None),
        "schedule.kind": (str, None),
        "schedule.breakpoints": (_breakpoints, None),
        "t_end": (float, 1.0),
        "domain.L": (float, 1.0),
        "dx": (float, None),
        "dt": (float, None),
        "sample_dt": (float, None),
        "snapshot_every": (int, 0),
        "ic.p": (str, "zero"),          # zero | psi0
        "ic.v_start": (float, None),    # velocity for the psi0 seed
        "ic.noise": (float, 0.0),
        "residual_diagnostics": (_bool, False),
        "recenter": (_bool, True),
    },
    "cell1d": {
        "eps": (float, 0.02),
        "beta": (float, 50.0),
        "a": (float, 0.5),
        "t_end": (float, 1.0),
        "domain.L": (float, None),
        "dx": (float, None),
        "dt": (float, None),
        "sample_dt": (float, None),
        "seed_amplitude": (float, 1e-3),
    },
    "pde2d": {
        "eps": (float, 0.04),
        "beta": (float, 10.0),
        "n": (int, 256),
        "domain.Lx": (float, 1.0),
        "domain.Ly": (float, 1.0),
        "r0": (float, 0.25),
        "t_end": (float, 0.05),
        "dt": (float, None),
        "sample_every": (int, 1),
        "contour_every": (int, 10),
        "snapshot_final": (_bool, True),
    },
    "sil2d": {
        "beta": (float, 0.0),
        "shape": (str, "circle"),       # circle | ellipse
        "radius": (float, 0.25),
        "ax_a": (float, 0.3),
        "ax_b": (float, 0.2),
        "n_nodes": (int, 128),
        "dt": (float, None),
        "t_end": (float, 0.01),
        "record_every": (int, 10),
    },
}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    values: dict
    source_text: str

    def get(self, key, default=None):
        v = self.values.get(key)
        return default if v is None else v

    def __getitem__(self, key):
        return self.values[key]

    def resolved_text(self) -> str:
        lines = [f"{k} = {_render(v)}" for k, v in sorted(self.values.items())
                 if v is not None]
        return "\n".join(lines) + "\n"


def _render(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        if v and isinstance(v[0], tuple):
            return "; ".join(f"{t:g}:{f:g}" for t, f in v)
        return ",".join(f"{x!r}" for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def parse_config_text(text: str, source: str = "<string>") -> ExperimentConfig:
    raw: dict[str, str] = {}
    for ln, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{source}:{ln}: expected 'key = value'")
        key, val = stripped.split("=", 1)
        key = key.strip()
        if key in raw:
            raise ConfigError(f"{source}:{ln}: duplicate key {key!r}")
        raw[key] = val.strip()

    exp = raw.get("experiment")
    if exp is None:
        raise ConfigError(f"{source}: missing required key 'experiment'")
    if exp not in EXPERIMENTS:
        raise ConfigError(
            f"{source}: unknown experiment {exp!r}; expected one of "
            f"{sorted(EXPERIMENTS)}"
        )

    schema = dict(_COMMON)
    schema.update(EXPERIMENTS[exp])
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ConfigError(f"{source}: unknown keys: {', '.join(unknown)}")

    values: dict = {}
    errors: list[str] = []
    for key, (conv, default) in schema.items():
        if key in raw:
            try:
                values[key] = conv(raw[key])
            except (ValueError, TypeError) as exc:
                errors.append(f"{key}: {exc}")
        elif default is _REQUIRED:
            errors.append(f"{key}: required for experiment {exp!r}")
        else:
            values[key] = default
    if errors:
        raise ConfigError(f"{source}: invalid config: " + "; ".join(errors))

    _validate_ranges(values, errors)
    if errors:
        raise ConfigError(f"{source}: invalid config: " + "; ".join(errors))
    return ExperimentConfig(experiment=exp, values=values, source_text=text)


def _validate_ranges(values: dict, errors: list[str]) -> None:
    def check(key, ok, msg):
        v = values.get(key)
        if v is not None and not ok(v):
            errors.append(f"{key}: {msg} (got {v!r})")

    check("eps", lambda v: v > 0.0, "must be > 0")
    check("beta", lambda v: v >= 0.0, "must be >= 0")
    check("grid.half_width", lambda v: v >= 20.0, "must be >= 20")
    check("grid.n_points", lambda v: v >= 1001 and v % 2 == 1,
          "must be odd and >= 1001")
    check("t_end", lambda v: v > 0.0, "must be > 0")
    check("n", lambda v: v >= 16, "must be >= 16")
    check("n_nodes", lambda v: v >= 16, "must be >= 16")
    check("samples_per_leg", lambda v: v >= 2, "must be >= 2")
    if "beta.list" in values and values["beta.list"] is not None:
        if any(b < 0 for b in values["beta.list"]):
            errors.append("beta.list: entries must be >= 0")


def parse_config(path) -> ExperimentConfig:
    with open(path, "r") as fh:
        text = fh.read()
    return parse_config_text(text, source=str(path))
