"""Command-line toolkit: ``jpsq <command> …``.

Commands emit JSON (scalar reports) or CSV (grids). Every artifact embeds
the resolved configuration and package version. CSV files carry them as
leading ``#`` comment lines. Failures exit nonzero and print a JSON error
object on stderr.
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path
from typing import Any

import click
import numpy as np
import yaml

from . import __version__
from . import analytic as an
from . import observables as obs
from . import spins
from .builtins import BUILTIN_NAMES, TABLE_I, TABLE_I_STIFF_EXCITATIONS, builtin, table_case
from .engine import WORKERS_ENV, default_workers
from .netlist import load_netlist, spec_to_dict
from .quantizer import DEFAULT_N_MAX, DEFAULT_STIFF_EXCITATIONS, quantize
from .spectrum import solve, sweep, sweep_csv


class ConfigError(click.UsageError):
    pass


# ---------------------------------------------------------------- parsing helpers


def parse_grid(text: str) -> tuple[str, list[float]]:
    """``name=start:stop:n`` (inclusive linspace), ``name=v1,v2,…`` or ``name=v``."""
    if "=" not in text:
        raise ConfigError(f"grid '{text}': expected name=start:stop:n or name=v1,v2,...")
    name, rhs = (s.strip() for s in text.split("=", 1))
    try:
        if ":" in rhs:
            a, b, n = rhs.split(":")
            n = int(n)
            if n < 1:
                raise ConfigError(f"grid '{text}' is empty")
            vals = np.linspace(float(a), float(b), n).tolist()
        else:
            vals = [float(v) for v in rhs.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"grid '{text}': {exc}") from exc
    if not vals:
        raise ConfigError(f"grid '{text}' is empty")
    return name, vals


def parse_assignments(items, kind=float) -> dict:
    out = {}
    for it in items:
        if "=" not in it:
            raise ConfigError(f"'{it}': expected name=value")
        k, v = it.split("=", 1)
        try:
            out[k.strip()] = kind(v)
        except ValueError as exc:
            raise ConfigError(f"'{it}': {exc}") from exc
    return out


def parse_parity(text: str, allow_mapping: bool = True):
    """``0``/``1`` for every island, or ``QbA=1,QbB=0`` per island charge bias."""
    text = str(text).strip()
    if "=" in text:
        if not allow_mapping:
            raise ConfigError("per-island parities are not supported here; use 0 or 1")
        return parse_assignments(text.split(","), int)
    try:
        return int(text)
    except ValueError as exc:
        raise ConfigError(f"parity '{text}': expected 0, 1 or name=value list") from exc


def _jsonable(x: Any):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    return x


def provenance(command: str, config: dict) -> dict:
    return {"tool": "jpsq", "version": __version__, "command": command, "config": _jsonable(config)}


def emit_json(payload: dict, out: str | None) -> None:
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=False) + "\n"
    _write(text, out)


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


# ---------------------------------------------------------------- model options


def model_options(f):
    opts = [
        click.option("--builtin", "builtin_name", type=click.Choice(BUILTIN_NAMES + ("fig6_jpsq",)), help="named built-in circuit"),
        click.option("--case", default=None, help="Table I case (A, B, C) for fig3b/fig6"),
        click.option("--netlist", type=click.Path(exists=True, dir_okay=False), help="YAML netlist file"),
        click.option("--n-max", default=DEFAULT_N_MAX, show_default=True, type=int, help="charge-basis cutoff"),
        click.option("--truncation", multiple=True, help="mode index=size override, repeatable"),
        click.option("--stiff-excitations", default=DEFAULT_STIFF_EXCITATIONS, show_default=True, type=int),
        click.option("--bias", multiple=True, help="bias override name=value, repeatable"),
        click.option("--method", default="auto", type=click.Choice(["auto", "dense", "lobpcg", "eigsh"])),
    ]
    for o in reversed(opts):
        f = o(f)
    return f


def build_model(builtin_name, case, netlist, n_max, truncation, stiff_excitations):
    if bool(builtin_name) == bool(netlist):
        raise ConfigError("give exactly one of --builtin or --netlist")
    spec = load_netlist(netlist) if netlist else builtin(builtin_name, case)
    trunc = {int(k): v for k, v in parse_assignments(truncation, int).items()}
    model = quantize(spec, truncations=trunc or None, n_max=n_max, stiff_excitations=stiff_excitations)
    config = {
        "circuit": spec_to_dict(spec),
        "source": {"builtin": builtin_name, "case": case, "netlist": netlist},
        "n_max": n_max,
        "truncations": trunc,
        "stiff_excitations": stiff_excitations,
        "dims": list(model.dims),
    }
    return model, config


def _check_bias_names(model, names) -> None:
    known = set(model.flux_names) | set(model.charge_names)
    bad = [n for n in names if n not in known]
    if bad:
        raise ConfigError(f"unknown bias name(s) {bad}; known: {sorted(known)}")


# ---------------------------------------------------------------- commands


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              help="YAML/JSON file of per-command option defaults, e.g. {sweep: {k: 6}}")
@click.option("--workers", type=int, default=None, help=f"worker processes (default ${WORKERS_ENV} or 1)")
@click.version_option(__version__)
@click.pass_context
def cli(ctx, config_path, workers):
    """Josephson phase-slip qubit simulation toolkit."""
    if config_path:
        doc = yaml.safe_load(Path(config_path).read_text(encoding="utf-8")) or {}
        if not isinstance(doc, dict):
            raise ConfigError("config file must be a mapping of command → options")
        ctx.default_map = {k: {kk.replace("-", "_"): vv for kk, vv in v.items()} for k, v in doc.items()}
    if workers is not None and workers < 1:
        raise ConfigError("--workers must be >= 1")
    ctx.obj = {"workers": workers if workers is not None else default_workers()}


@cli.command()
@model_options
@click.option("--k", default=6, show_default=True)
@click.option("--parity", default="0", show_default=True, help="0, 1 or name=value list")
@click.option("--out", default=None, help="output path (default stdout)")
def spectrum(builtin_name, case, netlist, n_max, truncation, stiff_excitations, bias, method, k, parity, out):
    """Lowest k eigenvalues at one bias point (JSON)."""
    model, config = build_model(builtin_name, case, netlist, n_max, truncation, stiff_excitations)
    b = parse_assignments(bias)
    _check_bias_names(model, b)
    par = parse_parity(parity)
    r = solve(model, b, par, k, vectors=False, method=method)
    config.update({"bias": r.bias.as_dict(), "k": k, "parity": parity, "method": method})
    emit_json({
        "provenance": provenance("spectrum", config),
        "eigenvalues_GHz": r.eigenvalues,
        "relative_GHz": r.relative(),
        "residuals": r.residuals,
        "method": r.method,
    }, out)


@cli.command("sweep")
@model_options
@click.option("--grid", "grids", multiple=True, help="axis spec name=start:stop:n (repeatable)")
@click.argument("extra_grids", nargs=-1)
@click.option("--k", default=4, show_default=True)
@click.option("--parity", "parities", multiple=True, default=["0"], show_default=True)
@click.option("--out", default=None)
@click.pass_context
def sweep_cmd(ctx, builtin_name, case, netlist, n_max, truncation, stiff_excitations, bias, method, grids, extra_grids, k, parities, out):
    """Level sheets over a bias grid (CSV)."""
    specs = list(grids) + list(extra_grids)
    if not specs:
        raise ConfigError("at least one --grid is required")
    grid = dict(parse_grid(g) for g in specs)
    model, config = build_model(builtin_name, case, netlist, n_max, truncation, stiff_excitations)
    b = parse_assignments(bias)
    _check_bias_names(model, list(b) + list(grid))
    pars = tuple(parse_parity(p, allow_mapping=False) for p in parities)
    res = sweep(model, grid, parities=pars, k=k, base=b, workers=ctx.obj["workers"], method=method)
    config.update({"grid": grid, "base_bias": b, "k": k, "parities": list(parities), "method": method})
    head = "".join(f"# {line}\n" for line in json.dumps(provenance("sweep", config), sort_keys=True).splitlines())
    _write(head + sweep_csv(res), out)
    if res.errors:
        err = {"error": "PointFailures", "failed_points": {f"{i}/{p}": m.splitlines()[0] for (i, p), m in sorted(res.errors.items())}}
        click.echo(json.dumps(err), err=True)
        ctx.exit(3)


def _analytic_params(beta, phiDelta, EJa, CJa, CI, case, dphiz, dphix, qb) -> an.AnalyticJpsqParams:
    if case:
        c = TABLE_I[case.upper()]
        base = dict(E_Ja=c.E_Ja, C_Ja=c.C_Ja, C_I=c.C_I, beta=c.beta, phi_delta=c.phi_delta)
    else:
        base = {}
    for k, v in (("beta", beta), ("phi_delta", phiDelta), ("E_Ja", EJa), ("C_Ja", CJa), ("C_I", CI)):
        if v is not None:
            base[k] = v
    missing = [k for k in ("E_Ja", "C_Ja", "C_I") if k not in base]
    if missing:
        raise ConfigError(f"missing analytic parameter(s) {missing} (or give --case)")
    return an.AnalyticJpsqParams(**base, dphi_z=dphiz, dphi_x=dphix, Q_b=qb)


@cli.command("analytic")
@click.option("--beta", type=float)
@click.option("--phiDelta", "phiDelta", type=float)
@click.option("--EJa", "EJa", type=float, help="GHz")
@click.option("--CJa", "CJa", type=float, help="fF")
@click.option("--CI", "CI", type=float, help="fF")
@click.option("--case", default=None, help="start from a Table I case")
@click.option("--dphiz", default=0.0, type=float)
@click.option("--dphix", default=0.0, type=float)
@click.option("--Qb", "qb", default=0.5, type=float, help="island offset charge (2e)")
@click.option("--text", is_flag=True, help="human-readable instead of JSON")
@click.option("--out", default=None)
def analytic_cmd(beta, phiDelta, EJa, CJa, CI, case, dphiz, dphix, qb, text, out):
    """Analytic instanton chain and two-level model (eqs. JPSQpot–dipoles)."""
    p = _analytic_params(beta, phiDelta, EJa, CJa, CI, case, dphiz, dphix, qb)
    rep = an.report(p)
    if text:
        _write(an.report_text(rep) + "\n", out)
        return
    emit_json({"provenance": provenance("analytic", {"params": p.__dict__}), **rep}, out)


def _numeric_dipoles(circuit: str, case: str, n_max: int, method: str) -> dict:
    model = quantize(table_case(case, circuit), n_max=n_max, stiff_excitations=TABLE_I_STIFF_EXCITATIONS)
    tl = obs.numerical_two_level(model, method=method)
    return {"dipoles": tl.dipoles, "splitting_GHz": tl.splitting_GHz, "margin_GHz": tl.extras["margin_GHz"], "dims": list(model.dims)}


@cli.command()
@click.option("--case", required=True)
@click.option("--n-max", default=DEFAULT_N_MAX, show_default=True, type=int)
@click.option("--skip-numeric", is_flag=True, help="analytic column only")
@click.option("--method", default="auto")
@click.option("--out", default=None)
def compare(case, n_max, skip_numeric, method, out):
    """Table I row: analytic vs. fig3b vs. fig6 dipoles (I^x nA, V^y µV, I^z nA)."""
    c = TABLE_I[case.upper()]
    p = an.AnalyticJpsqParams(E_Ja=c.E_Ja, C_Ja=c.C_Ja, C_I=c.C_I, beta=c.beta, phi_delta=c.phi_delta)
    tl = an.two_level_model(p)
    row = {"analytic": {"dipoles": tl.dipoles, "splitting_GHz": tl.splitting_GHz, "flags": tl.flags}}
    if not skip_numeric:
        for circ in ("fig3b", "fig6"):
            row[circ] = _numeric_dipoles(circ, case, n_max, method)
    paper = {"analytic": c.analytic, "fig3b": c.fig3b, "fig6": c.fig6}
    for k in row:
        row[k]["paper"] = paper[k]
        row[k]["relative_error"] = [d / q - 1 for d, q in zip(row[k]["dipoles"], paper[k])]
    emit_json({"provenance": provenance("compare", {"case": case, "n_max": n_max, "skip_numeric": skip_numeric}),
               "case": case.upper(), "columns": ["I_x_nA", "V_y_uV", "I_z_nA"], "row": row}, out)


@cli.command()
@model_options
@click.option("--axes", default="dPhiX,Qb,dPhiZ", show_default=True, help="x,y,z control biases")
@click.option("--aggregate", is_flag=True, help="also report eq:Ldipoles aggregates over the doublet")
@click.option("--out", default=None)
def dipoles(builtin_name, case, netlist, n_max, truncation, stiff_excitations, bias, method, axes, aggregate, out):
    """Numerical two-level model and Hellmann–Feynman dipoles about the AC null (JSON)."""
    model, config = build_model(builtin_name, case, netlist, n_max, truncation, stiff_excitations)
    ax = tuple(a.strip() for a in axes.split(","))
    if len(ax) != 3:
        raise ConfigError("--axes needs three names")
    _check_bias_names(model, ax)
    b = parse_assignments(bias)
    _check_bias_names(model, b)
    tl = obs.numerical_two_level(model, axes=ax, null=b or None, method=method)
    payload = {"two_level": tl.as_dict()}
    if aggregate:
        null = model.spec.default_bias().updated({ax[0]: 0.0, ax[1]: 0.5, ax[2]: 0.0, **b})
        r = solve(model, null, 0, 2, method=method)
        payload["aggregate"] = obs.aggregate_dipoles(model, r.eigenvectors, null).as_dict()
    config.update({"axes": list(ax), "null_overrides": b, "method": method})
    emit_json({"provenance": provenance("dipoles", config), **payload}, out)


@cli.command()
@click.option("--case", default=None, help="Table I case; dipoles default to its fig. 6 column")
@click.option("--dipoles", "dip", nargs=3, type=float, default=None, help="I^x nA, V^y µV, I^z nA")
@click.option("--source", type=click.Choice(["fig6", "fig3b", "analytic"]), default="fig6", show_default=True)
@click.option("--field", "field_dir", type=click.Choice(list("xyz")), default="z", show_default=True)
@click.option("--S-flux", "S_flux", default=4.3e-11, show_default=True, help="√S_Φ at f01, Φ0/√Hz")
@click.option("--S-charge", "S_charge", default=1.1e-8, show_default=True, help="√S_Q at f01, e/√Hz")
@click.option("--A-flux", "A_flux", default=None, type=float, help="1/f amplitude, Φ0 (default: Case A calibration)")
@click.option("--A-charge", "A_charge", default=None, type=float, help="1/f amplitude, e (default: Case A calibration)")
@click.option("--out", default=None)
def coherence(case, dip, source, field_dir, S_flux, S_charge, A_flux, A_charge, out):
    """Γ^g_φe and T1 per channel from dipoles and PSDs (JSON)."""
    if dip is None:
        if not case:
            raise ConfigError("give --case or --dipoles")
        c = TABLE_I[case.upper()]
        dip = an.two_level_model(an.AnalyticJpsqParams(E_Ja=c.E_Ja, C_Ja=c.C_Ja, C_I=c.C_I, beta=c.beta, phi_delta=c.phi_delta)).dipoles \
            if source == "analytic" else getattr(c, source)
    a = TABLE_I["A"]
    calib = obs.calibrate_amplitudes(a.fig6, [g * 1e6 for g in a.gamma])
    noise = obs.NoiseModel(S_flux=S_flux, S_charge=S_charge,
                           A_flux=A_flux if A_flux is not None else calib["A_flux"],
                           A_charge=A_charge if A_charge is not None else calib["A_charge"])
    m = obs.coherence_metrics(dip, noise, field_dir)
    emit_json({
        "provenance": provenance("coherence", {"case": case, "dipoles": list(dip), "source": source, "field": field_dir,
                                               "noise": noise.__dict__}),
        "gamma_1e6_rad_per_s": {k: v / 1e6 for k, v in m.gamma.items()},
        "t1_us": {k: v * 1e6 for k, v in m.t1.items()},
        "t1_combined_us": m.t1_combined * 1e6,
        "calibration": {"reference": "Table I case A, fig. 6 dipoles and Gamma", **calib},
        "conventions": m.conventions,
    }, out)


@cli.command()
@click.option("--model", "kind", type=click.Choice(["bacon-shor", "pauli"]), default="bacon-shor", show_default=True)
@click.option("--pauli", "pauli_path", type=click.Path(exists=True, dir_okay=False), help="Pauli text file (--model pauli)")
@click.option("--gap", default=2.1, show_default=True, help="ΔE_L in GHz; sets E_p")
@click.option("--Ep", "E_p", default=None, type=float, help="penalty strength (overrides --gap)")
@click.option("--hx", default=0.0, help="logical-x control, GHz")
@click.option("--hz", default=0.0, help="logical-z control, GHz")
@click.option("--charge-uV", "charge_uV", default=spins.DEFAULT_MAPPING.charge_uV, show_default=True)
@click.option("--flux-nA", "flux_nA", default=spins.DEFAULT_MAPPING.flux_z_nA, show_default=True)
@click.option("--emit", is_flag=True, help="print the Pauli text model instead of the report")
@click.option("--out", default=None)
def compose(kind, pauli_path, gap, E_p, hx, hz, charge_uV, flux_nA, emit, out):
    """Pauli-level models: the distance-2 Bacon-Shor qubit or any Pauli text file."""
    if kind == "pauli":
        if not pauli_path:
            raise ConfigError("--model pauli needs --pauli FILE")
        pm = spins.PauliModel.from_text(Path(pauli_path).read_text(encoding="utf-8"))
        if emit:
            _write(pm.to_text(), out)
            return
        w, _ = pm.eigh()
        emit_json({"provenance": provenance("compose", {"model": "pauli", "terms": pm.terms}), "eigenvalues_GHz": w}, out)
        return
    Ep = E_p if E_p is not None else spins.penalty_for_gap(gap)
    bs = spins.build_bacon_shor(Ep, hx, hz)
    if emit:
        _write(bs.model.to_text(), out)
        return
    mapping = spins.NoiseMapping(charge_uV, flux_nA, flux_nA)
    ld = spins.logical_dipoles(bs, obs.SECTION_IV_NOISE, mapping)
    emit_json({
        "provenance": provenance("compose", {"model": "bacon-shor", "E_p": Ep, "h_x": hx, "h_z": hz, "mapping": mapping.__dict__}),
        "energies_GHz": bs.energies,
        "gap_GHz": bs.gap,
        "logical_splitting_GHz": bs.logical_splitting,
        "check_commutators": bs.check_commutators(),
        "logical_algebra": bs.logical_algebra(),
        "logical_dipoles": ld.as_dict(),
    }, out)


def _error_json(exc: BaseException, code: int) -> None:
    click.echo(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": code}), err=True)


def main(argv=None) -> int:
    try:
        # with standalone_mode=False click returns ctx.exit() codes instead of raising
        rv = cli.main(args=argv, prog_name="jpsq", standalone_mode=False)
        return rv if isinstance(rv, int) else 0
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.Abort as exc:
        _error_json(exc, 130)
        return 130
    except click.ClickException as exc:
        _error_json(exc, 2)
        return 2
    except Exception as exc:  # any failure → machine-readable error
        _error_json(exc, 1)
        return 1


if __name__ == "__main__":
    sys.exit(main())
