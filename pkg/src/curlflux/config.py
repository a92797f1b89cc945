"""Run configuration: YAML schema, validation and model construction.

A run file has four sections::

    model:
      type: junction | generic
      junction:            # type: junction
        mu_1: 1.0
        mu_2: 0.5
        # omega_1, omega_2, omega_g, delta, gamma, t_1, t_2, dipole,
        # coulomb_u are optional and default to the reference values
      generic:             # type: generic
        levels: {a: 0.0, b: 1.0}
        channels:
          - {upper: b, lower: a, rate_up: 0.004, rate_down: 0.02}
    sweep:
      omega: {min: 0.85, max: 1.15, points: 1201}   # or {values: [...]}
      bias:                 # junction only, optional
        mode: symmetric     # mu_{1,2} = center +- dmu
        center: 1.0
        dmu: [0.0, 0.1]
        extra_pairs: [[1.0, 0.5]]   # explicit (mu_1, mu_2) runs
    output:
      directory: out
      prefix: run
    numerics:
      epsilon: null         # resolvent regularization
      db_tol: 1.0e-9        # detailed-balance tolerance for fdr-check

Unknown keys raise errors so typos do not silently change a run.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import yaml

from .junction import JunctionParams
from .liouville import DissipationChannel, HilbertBasis, build_liouvillian

__all__ = ["ConfigError", "RunConfig", "GenericModel", "load_config",
           "build_generic_model", "junction_sweep_points"]


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


@dataclass(frozen=True)
class GenericModel:
    """A diagonal-Hamiltonian model defined directly by levels and rates."""

    basis: HilbertBasis
    hamiltonian: np.ndarray
    channels: tuple
    temperature: Optional[float] = None


@dataclass(frozen=True)
class RunConfig:
    model_type: str
    junction: Optional[JunctionParams]
    generic: Optional[GenericModel]
    omega_grid: np.ndarray
    bias_points: tuple          # ((tag, mu_1, mu_2), ...) for junction sweeps
    out_dir: str
    prefix: str
    epsilon: Optional[float]
    db_tol: float
    temperature: Optional[float]


def _require(mapping, key, path):
    if key not in mapping:
        raise ConfigError("missing required field '%s.%s'" % (path, key))
    return mapping[key]


def _check_keys(mapping, allowed, path):
    extra = set(mapping) - set(allowed)
    if extra:
        raise ConfigError(
            "unknown field(s) %s in '%s'" % (sorted(extra), path)
        )


def _float(value, path):
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise ConfigError("field '%s' must be a number, got %r" % (path, value))
    if not np.isfinite(out):
        raise ConfigError("field '%s' must be finite" % path)
    return out


def _omega_grid(section):
    _check_keys(section, {"min", "max", "points", "values"}, "sweep.omega")
    if "values" in section:
        grid = np.asarray([_float(v, "sweep.omega.values") for v in section["values"]])
    else:
        lo = _float(_require(section, "min", "sweep.omega"), "sweep.omega.min")
        hi = _float(_require(section, "max", "sweep.omega"), "sweep.omega.max")
        n = _require(section, "points", "sweep.omega")
        if not isinstance(n, int) or n < 1:
            raise ConfigError("sweep.omega.points must be a positive integer")
        grid = np.linspace(lo, hi, n)
    if grid.size == 0:
        raise ConfigError("sweep.omega produced an empty grid")
    return grid


def load_config(path):
    """Parse and validate a YAML run file."""
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError("cannot read config file: %s" % exc)
    except yaml.YAMLError as exc:
        raise ConfigError("malformed YAML: %s" % exc)
    if not isinstance(raw, dict):
        raise ConfigError("top level of the config must be a mapping")
    _check_keys(raw, {"model", "sweep", "output", "numerics"}, "<top>")

    model = _require(raw, "model", "<top>")
    _check_keys(model, {"type", "junction", "generic"}, "model")
    mtype = _require(model, "type", "model")
    if "junction" in model and "generic" in model:
        raise ConfigError("config must contain exactly one model section")
    junction = None
    generic = None
    temperature = None
    if mtype == "junction":
        sect = dict(_require(model, "junction", "model"))
        if "gamma_1" in sect or "gamma_2" in sect:
            raise ConfigError(
                "per-electrode exchange rates are not supported; the model "
                "assumes a common 'gamma' for both electrodes"
            )
        allowed = {
            "mu_1", "mu_2", "omega_1", "omega_2", "omega_g", "delta",
            "gamma", "t_1", "t_2", "dipole", "coulomb_u",
        }
        _check_keys(sect, allowed, "model.junction")
        kwargs = {k: _float(v, "model.junction.%s" % k) for k, v in sect.items()}
        if "mu_1" not in kwargs or "mu_2" not in kwargs:
            raise ConfigError("model.junction requires mu_1 and mu_2")
        try:
            junction = JunctionParams(**kwargs)
        except ValueError as exc:
            raise ConfigError("model.junction: %s" % exc)
        if junction.t_1 == junction.t_2:
            temperature = junction.t_1
    elif mtype == "generic":
        sect = _require(model, "generic", "model")
        _check_keys(sect, {"levels", "channels", "temperature"}, "model.generic")
        levels = _require(sect, "levels", "model.generic")
        if not isinstance(levels, dict) or not levels:
            raise ConfigError("model.generic.levels must be a non-empty mapping")
        labels = tuple(levels.keys())
        energies = [_float(levels[k], "model.generic.levels.%s" % k) for k in labels]
        basis = HilbertBasis(labels)
        ham = np.diag(np.asarray(energies, dtype=complex))
        channels = []
        for i, ch in enumerate(sect.get("channels", [])):
            path = "model.generic.channels[%d]" % i
            _check_keys(ch, {"upper", "lower", "rate_up", "rate_down"}, path)
            upper = basis.index(_require(ch, "upper", path))
            lower = basis.index(_require(ch, "lower", path))
            if upper == lower:
                raise ConfigError("%s: upper and lower must differ" % path)
            raising = np.zeros((basis.dim, basis.dim), dtype=complex)
            raising[upper, lower] = 1.0
            channels.append(DissipationChannel(
                raising,
                _float(_require(ch, "rate_up", path), path + ".rate_up"),
                _float(_require(ch, "rate_down", path), path + ".rate_down"),
                float(energies[upper] - energies[lower]),
            ))
        if "temperature" in sect:
            temperature = _float(sect["temperature"], "model.generic.temperature")
        generic = GenericModel(basis=basis, hamiltonian=ham,
                               channels=tuple(channels), temperature=temperature)
    else:
        raise ConfigError("model.type must be 'junction' or 'generic'")

    sweep = _require(raw, "sweep", "<top>")
    _check_keys(sweep, {"omega", "bias"}, "sweep")
    omega_grid = _omega_grid(_require(sweep, "omega", "sweep"))

    bias_points = []
    if "bias" in sweep:
        if mtype != "junction":
            raise ConfigError("sweep.bias applies only to junction models")
        bias = sweep["bias"]
        _check_keys(bias, {"mode", "center", "dmu", "extra_pairs"}, "sweep.bias")
        mode = bias.get("mode", "symmetric")
        if mode not in ("symmetric", "fixed"):
            raise ConfigError("sweep.bias.mode must be 'symmetric' or 'fixed'")
        if mode == "symmetric":
            center = _float(bias.get("center", 1.0), "sweep.bias.center")
            for dmu in bias.get("dmu", []):
                dmu = _float(dmu, "sweep.bias.dmu")
                bias_points.append(
                    ("dmu%.4g" % dmu, center + dmu, center - dmu)
                )
        for pair in bias.get("extra_pairs", []):
            if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                raise ConfigError("sweep.bias.extra_pairs entries must be pairs")
            mu1 = _float(pair[0], "sweep.bias.extra_pairs")
            mu2 = _float(pair[1], "sweep.bias.extra_pairs")
            bias_points.append(("mu%.4g_%.4g" % (mu1, mu2), mu1, mu2))
    if mtype == "junction" and not bias_points:
        bias_points.append(("run", junction.mu_1, junction.mu_2))

    output = raw.get("output", {})
    _check_keys(output, {"directory", "prefix"}, "output")
    out_dir = str(output.get("directory", "."))
    prefix = str(output.get("prefix", "curlflux"))

    numerics = raw.get("numerics", {})
    _check_keys(numerics, {"epsilon", "db_tol"}, "numerics")
    epsilon = numerics.get("epsilon", None)
    if epsilon is not None:
        epsilon = _float(epsilon, "numerics.epsilon")
        if epsilon <= 0:
            raise ConfigError("numerics.epsilon must be positive when given")
    db_tol = _float(numerics.get("db_tol", 1e-9), "numerics.db_tol")

    return RunConfig(
        model_type=mtype,
        junction=junction,
        generic=generic,
        omega_grid=omega_grid,
        bias_points=tuple(bias_points),
        out_dir=out_dir,
        prefix=prefix,
        epsilon=epsilon,
        db_tol=db_tol,
        temperature=temperature,
    )


def build_generic_model(generic):
    """Liouvillian of a generic diagonal-Hamiltonian model."""
    return build_liouvillian(generic.hamiltonian, generic.channels)


def junction_sweep_points(config):
    """Expand the bias sweep into (tag, JunctionParams) pairs."""
    from dataclasses import replace

    return [
        (tag, replace(config.junction, mu_1=mu1, mu_2=mu2))
        for tag, mu1, mu2 in config.bias_points
    ]
