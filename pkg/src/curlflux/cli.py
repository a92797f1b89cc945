"""Command-line driver.

Subcommands::

    curlflux spectrum  --config run.yaml [--out DIR] [--threads N]
    curlflux flux      --config run.yaml [--out DIR]
    curlflux fdr-check --config run.yaml [--out DIR]
    curlflux validate  --config run.yaml

`spectrum` writes one CSV per sweep point with columns
omega,re_full,im_full,im_eq,im_ne; `flux` writes a JSON flux report;
`fdr-check` writes per-frequency residuals of the equilibrium
fluctuation-dissipation comparison (and refuses driven models);
`validate` runs the model invariant suite and reports each check.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .config import ConfigError, build_generic_model, junction_sweep_points, load_config
from .flux import (
    curl_flux,
    is_detailed_balanced,
    reconstruct_flux,
    render_flux_report,
    split_operators,
)
from .junction import build_junction, transmission
from .liouville import partition, trace_vector
from .reduction import (
    NonUniqueSteadyStateError,
    coherence_map,
    effective_rate_matrix,
    rate_steady_state,
    steady_state,
)
from .response import (
    NotDetailedBalancedError,
    ResolventSingularError,
    check_equilibrium_fdr,
    spectrum_to_csv,
)

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

NUMERICAL_ERRORS = (
    NonUniqueSteadyStateError,
    NotDetailedBalancedError,
    ResolventSingularError,
    np.linalg.LinAlgError,
    ValueError,
)


def _write(path, text):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as fh:
        fh.write(text)
    print("wrote %s" % path)


def _out_path(config, out_override, name):
    base = out_override if out_override else config.out_dir
    return os.path.join(base, name)


def _bool_flag(value):
    lowered = value.lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError("expected true/false, got %r" % value)


def cmd_spectrum(config, args):
    if config.model_type == "junction":
        points = junction_sweep_points(config)

        def run_point(item):
            tag, params = item
            spectrum, t_ne, model = transmission(
                params, config.omega_grid,
                strict_paper_rates=args.strict_paper_rates,
                epsilon=config.epsilon,
            )
            return tag, spectrum_to_csv(spectrum)

        if args.threads > 1:
            with ThreadPoolExecutor(max_workers=args.threads) as pool:
                results = list(pool.map(run_point, points))
        else:
            results = [run_point(item) for item in points]
        for tag, text in results:
            _write(
                _out_path(config, args.out, "%s_%s.csv" % (config.prefix, tag)),
                text,
            )
    else:
        from .response import Probe, linear_response_freq

        m = build_generic_model(config.generic)
        rho = steady_state(m).vector
        # default probe: couple every adjacent level pair with unit dipole
        d = config.generic.basis.dim
        v = np.zeros((d, d), dtype=complex)
        for ch in config.generic.channels:
            v += ch.raising + ch.raising.conj().T
        if not np.any(v):
            raise ValueError("generic model has no channels to define a probe")
        spec = linear_response_freq(Probe(v, v), m, rho, config.omega_grid,
                                    epsilon=config.epsilon)
        _write(
            _out_path(config, args.out, "%s_spectrum.csv" % config.prefix),
            spectrum_to_csv(spec),
        )


def _flux_pipeline(config, strict):
    if config.model_type == "junction":
        model = build_junction(config.junction, strict_paper_rates=strict)
        labels = list(model.basis.labels)
        ratio = None
        coh = model.coherence_e1e2
        if abs(coh.imag) > 0:
            ratio = model.flux_j / coh.imag
        extra = {
            "loop_flux_j": model.flux_j,
            "im_coherence_e1e2": coh.imag,
            "flux_coherence_ratio": ratio,
        }
        return model.l_matrix, model.populations, model.flux, model.split, labels, extra
    m = build_generic_model(config.generic)
    blocks = partition(m)
    l_matrix = effective_rate_matrix(blocks)
    pops = rate_steady_state(l_matrix).vector
    decomp = curl_flux(l_matrix, pops)
    split = split_operators(l_matrix, pops, decomp)
    return l_matrix, pops, decomp, split, list(config.generic.basis.labels), {}


def cmd_flux(config, args):
    l_matrix, pops, decomp, split, labels, extra = _flux_pipeline(
        config, args.strict_paper_rates
    )
    balanced, violation = is_detailed_balanced(l_matrix, pops)
    extra["populations"] = list(map(float, pops))
    report = render_flux_report(decomp, split, labels=labels, extra=extra)
    _write(_out_path(config, args.out, "%s_flux.json" % config.prefix), report)
    print("detailed balance: %s (max violation %.6e)" % (balanced, violation))


def cmd_fdr_check(config, args):
    if config.temperature is None:
        raise ConfigError(
            "fdr-check requires a thermal model: equal electrode "
            "temperatures (junction) or model.generic.temperature"
        )
    if config.model_type == "junction":
        model = build_junction(config.junction,
                               strict_paper_rates=args.strict_paper_rates)
        m = model.m
        from .junction import dipole_operator

        coupling = dipole_operator(config.junction)
    else:
        m = build_generic_model(config.generic)
        d = config.generic.basis.dim
        coupling = np.zeros((d, d), dtype=complex)
        for ch in config.generic.channels:
            coupling += ch.raising + ch.raising.conj().T
    report = check_equilibrium_fdr(coupling, m, config.temperature,
                                   config.omega_grid, db_tol=config.db_tol,
                                   epsilon=config.epsilon)
    lines = ["omega,lhs,re_rhs,im_rhs,residual"]
    for w, lhs, rhs, res in zip(report.omega, report.lhs, report.rhs,
                                report.residual):
        lines.append("%.17g,%.17g,%.17g,%.17g,%.17g"
                     % (w, lhs, rhs.real, rhs.imag, res))
    _write(_out_path(config, args.out, "%s_fdr.csv" % config.prefix),
           "\n".join(lines) + "\n")
    print("max residual: %.6e" % report.max_residual)


def _check(name, ok, detail=""):
    print("%-42s %s %s" % (name, "PASS" if ok else "FAIL", detail))
    return ok


def cmd_validate(config, args):
    """Invariant suite over the configured model."""
    ok = True
    if config.model_type == "junction":
        model = build_junction(config.junction,
                               strict_paper_rates=args.strict_paper_rates)
        m, blocks = model.m, model.blocks
        l_matrix, pops = model.l_matrix, model.populations
        rho = model.rho_ss
        k_map, decomp, split = model.k_map, model.flux, model.split
        labels = model.basis.labels
    else:
        m = build_generic_model(config.generic)
        blocks = partition(m)
        l_matrix = effective_rate_matrix(blocks)
        k_map = coherence_map(blocks)
        rho = steady_state(m)
        pops = rho.vector[:blocks.dim].real
        decomp = curl_flux(l_matrix, pops)
        split = split_operators(l_matrix, pops, decomp)
        labels = config.generic.basis.labels
    d = blocks.dim
    one = trace_vector(d)
    ok &= _check("trace preservation <<1|M = 0",
                 np.abs(one @ m).max() < 1e-12,
                 "max %.2e" % np.abs(one @ m).max())
    ok &= _check("steady state residual", rho.residual <= 1e-10,
                 "%.2e" % rho.residual)
    tr_err = abs(rho.vector[:d].sum().real - 1.0)
    ok &= _check("steady state trace", tr_err <= 1e-12, "%.2e" % tr_err)
    coh_err = np.abs(rho.vector[d:] - k_map @ rho.vector[:d]).max(initial=0.0)
    ok &= _check("stationary coherences equal K rho_p", coh_err <= 1e-10,
                 "%.2e" % coh_err)
    lp = np.abs(l_matrix @ pops).max()
    ok &= _check("reduced rates stationary on populations", lp <= 1e-10,
                 "%.2e" % lp)
    col = np.abs(l_matrix.sum(axis=0)).max()
    ok &= _check("rate matrix columns sum to zero", col <= 1e-12,
                 "%.2e" % col)
    c = decomp.c
    ok &= _check("curl flux non-negative", bool(np.all(c >= 0)))
    ok &= _check("curl flux unidirectional",
                 np.abs(c * c.T).max(initial=0.0) <= 1e-24)
    div = np.abs(c.sum(axis=0) - c.sum(axis=1)).max()
    ok &= _check("curl flux divergence free", div <= 1e-11, "%.2e" % div)
    rec = np.abs(reconstruct_flux(decomp.loops, d) - c).max()
    ok &= _check("loops reconstruct the flux", rec <= 1e-11, "%.2e" % rec)
    sv = np.abs(split.s_d + split.v_ss + 1.0).max()
    ok &= _check("split operators sum to -1", sv <= 1e-11, "%.2e" % sv)
    balanced, violation = is_detailed_balanced(l_matrix, pops)
    print("%-42s %s (max violation %.3e)"
          % ("detailed balance", "yes" if balanced else "no", violation))
    if not ok:
        raise ValueError("validation failed")
    print("all checks passed for model with states %s" % (tuple(labels),))


def build_parser():
    parser = argparse.ArgumentParser(
        prog="curlflux",
        description="Steady-state curl-flux decomposition and linear "
                    "response spectra of dissipative quantum models",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, doc in (
        ("spectrum", cmd_spectrum, "compute response spectra over the sweep"),
        ("flux", cmd_flux, "write the steady-state flux report"),
        ("fdr-check", cmd_fdr_check,
         "compare dissipation and fluctuation sides at equilibrium"),
        ("validate", cmd_validate, "run the model invariant suite"),
    ):
        p = sub.add_parser(name, help=doc)
        p.add_argument("--config", required=True, help="YAML run file")
        p.add_argument("--out", default=None,
                       help="output directory (overrides the config)")
        p.add_argument("--threads", type=int, default=1,
                       help="worker threads for sweep points")
        p.add_argument("--strict-paper-rates", type=_bool_flag, default=True,
                       metavar="BOOL",
                       help="keep the crossed coherence decay pairing "
                            "(default true); false swaps it")
        p.set_defaults(func=fn)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG
    try:
        args.func(config, args)
    except ConfigError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG
    except NUMERICAL_ERRORS as exc:
        print("numerical error: %s" % exc, file=sys.stderr)
        return EXIT_NUMERICAL
    return 0


if __name__ == "__main__":
    sys.exit(main())
