"""Command-line interface for code construction, spectra, fitting, and mapping.

Every run is determined by its options: output files embed a metadata
header (tool version, resolved config, seed) and repeated runs with the
same config and seed produce byte-identical CSV/JSON.  Exit codes: 0
success, 2 validation failure, 3 resource cap exceeded, 4 bad input.
"""

from __future__ import annotations

import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import click
import numpy as np

from . import __version__, f2, logicals, mapping, penalty
from .codes import trapezoid_code
from .penalty import SolverError

EXIT_VALIDATION = 2
EXIT_CAP = 3
EXIT_BAD_INPUT = 4


def _meta(config: dict, seed: int | None = None) -> dict:
    meta = {"tool": "trapcodes", "version": __version__, "config": config}
    if seed is not None:
        meta["seed"] = seed
    return meta


def _emit(doc: dict, out: str | None, meta: dict) -> None:
    payload = {"meta": meta}
    payload.update(doc)
    text = json.dumps(payload, indent=2) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
        click.echo(out)
    else:
        click.echo(text, nl=False)


def _emit_text(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
        click.echo(out)
    else:
        click.echo(text, nl=False)


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _build_code(m: int, l: int):
    try:
        return trapezoid_code(m, l)
    except ValueError as exc:
        _fail(EXIT_BAD_INPUT, str(exc))


def _parse_range(spec: str) -> list[int]:
    """Parse '3..15' or a comma list '3,5,7' into a list of ints."""
    spec = spec.strip()
    if ".." in spec:
        a, b = spec.split("..", 1)
        return list(range(int(a), int(b) + 1))
    return [int(tok) for tok in spec.split(",") if tok]


@click.group()
@click.version_option(version=__version__, prog_name="trapcodes")
def main() -> None:
    """Trapezoid subsystem codes: construction, spectra, and hardware maps."""


@main.command("code")
@click.argument("m", type=int)
@click.argument("l", type=int)
@click.option("--dot", "as_dot", is_flag=True, help="Emit the induced graph in DOT instead of code JSON.")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def cmd_code(m: int, l: int, as_dot: bool, out: str | None) -> None:
    """Construct the (M, L) trapezoid code, validate it, and emit JSON."""
    code = _build_code(m, l)
    try:
        code.validate()
    except ValueError as exc:
        _fail(EXIT_VALIDATION, f"construction invariant failed: {exc}")
    if as_dot:
        _emit_text(mapping.build_induced_graph(code).to_dot() + "\n", out)
        return
    _emit({"code": code.to_json()}, out, _meta({"command": "code", "m": m, "l": l}))


@main.command("logicals")
@click.argument("m", type=int)
@click.argument("l", type=int)
@click.option("--search-space", is_flag=True, help="Include the full 2-local bitstring space.")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def cmd_logicals(m: int, l: int, search_space: bool, out: str | None) -> None:
    """Canonical operator/gauge matrices and dressed logical operators."""
    code = _build_code(m, l)
    X, Z = logicals.operator_matrices(m, l)
    Xbar, Zbar = logicals.gauge_matrices(code)
    dset = logicals.dressed_logical_set(code)
    report = logicals.validate_logical_set(code, dset)
    if not report.passed:
        _fail(EXIT_VALIDATION, "; ".join(report.failures))
    doc = {
        "operator_matrices": {
            "X": [f2.bits_to_str(r) for r in X],
            "Z": [f2.bits_to_str(r) for r in Z],
        },
        "gauge_matrices": {
            "Xbar": [f2.bits_to_str(r) for r in Xbar],
            "Zbar": [f2.bits_to_str(r) for r in Zbar],
        },
        "dressed": dset.to_json(),
        "validation": {
            "stabilizer_commutation": report.stabilizer_commutation,
            "pairwise_symplectic": report.pairwise_symplectic,
            "centralizer_not_gauge": report.centralizer_not_gauge,
        },
    }
    if search_space:
        doc["two_local_strings"] = {
            "z": sorted(logicals.two_local_strings(m, l, "Z")),
            "x": sorted(logicals.two_local_strings(m, l, "X")),
        }
    _emit(doc, out, _meta({"command": "logicals", "m": m, "l": l}))


@main.command("gap")
@click.option("--l", "l_rule", required=True, help="Fixed l, 'k', or 'k-<d>'.")
@click.option("--m", "m_range", required=True, help="Range like 3..15 or comma list.")
@click.option("--mode", type=click.Choice(["full_spectrum", "ground_sector"]), default="full_spectrum")
@click.option("--selection", type=click.Choice(["anchored", "nearest"]), default="anchored")
@click.option("--fit", "fit_models", type=click.Choice(["power", "expo", "both"]), default=None)
@click.option("--seed", type=int, default=7)
@click.option("--threads", type=int, default=1, help="Worker threads across sweep points.")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.option("--plot", is_flag=True, help="Render a gap-scaling figure next to the CSV.")
def cmd_gap(l_rule, m_range, mode, selection, fit_models, seed, threads, out, plot) -> None:
    """Sweep penalty gaps over m and optionally fit the scaling."""
    try:
        ms = _parse_range(m_range)
        rule: int | str = int(l_rule) if l_rule.isdigit() else l_rule
    except ValueError as exc:
        _fail(EXIT_BAD_INPUT, str(exc))
    config = {
        "command": "gap", "l": l_rule, "m": m_range, "mode": mode,
        "selection": selection, "fit": fit_models, "threads": threads,
    }
    try:
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                chunks = list(
                    pool.map(
                        lambda m: penalty.sweep_gaps([m], rule, mode=mode, seed=seed, selection=selection),
                        ms,
                    )
                )
            rows = sorted((r for ch in chunks for r in ch), key=lambda r: (r.l, r.m))
        else:
            rows = penalty.sweep_gaps(ms, rule, mode=mode, seed=seed, selection=selection)
    except ValueError as exc:
        _fail(EXIT_BAD_INPUT, str(exc))
    csv = penalty.sweep_to_csv(rows, meta={"tool": "trapcodes", "version": __version__,
                                           "config": json.dumps(config), "seed": seed})
    fits: dict[str, penalty.FitResult] = {}
    if fit_models:
        pts = [(r.m, r.gap) for r in rows if r.gap is not None]
        models = ["power", "expo"] if fit_models == "both" else [fit_models]
        try:
            for model in models:
                fits[model] = penalty.fit_gap_scaling(pts, model)
        except ValueError as exc:
            _fail(EXIT_BAD_INPUT, f"fit failed: {exc}")
        csv += "# fits: " + json.dumps({k: v.to_json() for k, v in fits.items()}, sort_keys=True) + "\n"
    _emit_text(csv, out)
    if plot:
        if not out:
            _fail(EXIT_BAD_INPUT, "--plot requires --out")
        from . import plotting

        click.echo(plotting.plot_gap_sweep(rows, os.path.splitext(out)[0] + ".png", fits))


@main.command("fit")
@click.option("--in", "infile", required=True, type=click.Path(exists=True, dir_okay=False),
              help="Sweep CSV produced by the gap command.")
@click.option("--model", type=click.Choice(["power", "expo", "both"]), default="both")
@click.option("--x-col", type=click.Choice(["m", "l", "n"]), default="m")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def cmd_fit(infile, model, x_col, out) -> None:
    """Fit gap-scaling models to a sweep CSV."""
    pts: list[tuple[float, float]] = []
    with open(infile) as fh:
        header: list[str] | None = None
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if header is None:
                header = line.split(",")
                continue
            rec = dict(zip(header, line.split(",")))
            if rec.get("gap"):
                pts.append((float(rec[x_col]), float(rec["gap"])))
    try:
        models = ["power", "expo"] if model == "both" else [model]
        fits = {name: penalty.fit_gap_scaling(pts, name) for name in models}
    except ValueError as exc:
        _fail(EXIT_BAD_INPUT, str(exc))
    doc: dict = {"fits": {k: v.to_json() for k, v in fits.items()}}
    if len(fits) == 2:
        doc["preferred_by_aic"] = min(fits, key=lambda k: fits[k].aic)
    _emit(doc, out, _meta({"command": "fit", "in": os.path.basename(infile), "model": model, "x_col": x_col}))


@main.command("graph")
@click.option("--code", "code_params", nargs=2, type=int, default=None, help="m l of an induced graph.")
@click.option("--hardware", "hw_name", type=click.Choice(mapping.HARDWARE_NAMES), default=None)
@click.option("--extent", nargs=2, type=int, default=None, help="rows cols for periodic layouts.")
@click.option("--close-gauge-cycles", is_flag=True)
@click.option("--format", "fmt", type=click.Choice(["json", "dot", "csv"]), default="json")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.option("--plot", is_flag=True)
def cmd_graph(code_params, hw_name, extent, close_gauge_cycles, fmt, out, plot) -> None:
    """Export an induced interaction graph or a hardware layout."""
    if (code_params is None) == (hw_name is None):
        _fail(EXIT_BAD_INPUT, "give exactly one of --code or --hardware")
    if code_params:
        code = _build_code(*code_params)
        g = mapping.build_induced_graph(code, close_gauge_cycles=close_gauge_cycles)
        if fmt == "csv":
            _fail(EXIT_BAD_INPUT, "distance CSV applies to hardware graphs")
        if fmt == "dot":
            _emit_text(g.to_dot() + "\n", out)
        else:
            _emit({"induced": g.to_json()}, out,
                  _meta({"command": "graph", "code": list(code_params),
                         "close_gauge_cycles": close_gauge_cycles}))
        if plot:
            from . import plotting

            if not out:
                _fail(EXIT_BAD_INPUT, "--plot requires --out")
            click.echo(plotting.plot_induced(g, os.path.splitext(out)[0] + ".png"))
        return
    try:
        hw = mapping.hardware_graph(hw_name, tuple(extent) if extent else None)
    except ValueError as exc:
        _fail(EXIT_BAD_INPUT, str(exc))
    if fmt == "dot":
        _emit_text(hw.to_dot() + "\n", out)
    elif fmt == "csv":
        _emit_text(hw.distance_csv(), out)
    else:
        _emit({"hardware": hw.to_json()}, out,
              _meta({"command": "graph", "hardware": hw_name, "extent": list(extent) if extent else None}))
    if plot:
        from . import plotting

        if not out:
            _fail(EXIT_BAD_INPUT, "--plot requires --out")
        click.echo(plotting.plot_hardware(hw, os.path.splitext(out)[0] + ".png"))


@main.command("map")
@click.argument("m", type=int)
@click.argument("l", type=int)
@click.argument("layout", type=str)
@click.option("--exact/--anneal", default=True, help="Exact branch-and-bound or annealing.")
@click.option("--export-lp", is_flag=True, help="Write the MIP in LP format instead of solving.")
@click.option("--extent", nargs=2, type=int, default=None)
@click.option("--seed", type=int, default=0)
@click.option("--max-vertices", type=int, default=int(os.environ.get("TRAPCODES_EXACT_SEARCH_CAP", 10)))
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.option("--plot", is_flag=True)
def cmd_map(m, l, layout, exact, export_lp, extent, seed, max_vertices, out, plot) -> None:
    """Place the (M, L) induced graph onto a hardware LAYOUT."""
    import time

    code = _build_code(m, l)
    induced = mapping.build_induced_graph(code)
    try:
        hw = mapping.hardware_graph(layout, tuple(extent) if extent else None)
    except ValueError as exc:
        _fail(EXIT_BAD_INPUT, str(exc))
    config = {"command": "map", "m": m, "l": l, "layout": layout,
              "method": "lp" if export_lp else ("exact" if exact else "anneal")}
    if export_lp:
        _emit_text(mapping.export_mip_lp(induced, hw, meta={"tool": f"trapcodes {__version__}",
                                                            "config": json.dumps(config)}), out)
        return
    t0 = time.time()
    try:
        if exact:
            vec, sc = mapping.brute_force_map(induced, hw, max_vertices=max_vertices)
        else:
            vec, sc = mapping.anneal_map(induced, hw, seed=seed)
    except mapping.SearchCapError as exc:
        _fail(EXIT_CAP, f"{exc}; rerun with --anneal or raise --max-vertices")
    except ValueError as exc:
        _fail(EXIT_BAD_INPUT, str(exc))
    doc = {
        "placement": vec,
        "score": sc.to_json(),
        "method": "exact" if exact else "anneal",
        "runtime_seconds": round(time.time() - t0, 3),
        "edges": len(induced.edges),
    }
    _emit(doc, out, _meta(config, seed=seed))
    if plot:
        from . import plotting

        if not out:
            _fail(EXIT_BAD_INPUT, "--plot requires --out")
        click.echo(plotting.plot_mapping(induced, hw, vec, os.path.splitext(out)[0] + ".png"))


@main.command("encode")
@click.argument("m", type=int)
@click.argument("l", type=int)
@click.option("--in", "infile", required=True, type=click.Path(exists=True, dir_okay=False),
              help="Logical Hamiltonian JSON: {'terms': [{family, indices, coefficient}, ...]}.")
@click.option("--seed", type=int, default=7)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def cmd_encode(m, l, infile, seed, out) -> None:
    """Encode a logical Hamiltonian into 2-local physical terms."""
    code = _build_code(m, l)
    with open(infile) as fh:
        doc = json.load(fh)
    try:
        terms = [
            penalty.LogicalTerm(t["family"], tuple(t["indices"]), float(t["coefficient"]))
            for t in doc["terms"]
        ]
    except (KeyError, TypeError) as exc:
        _fail(EXIT_BAD_INPUT, f"malformed logical Hamiltonian: {exc}")
    try:
        encoded = penalty.encode_hamiltonian(code, terms, seed=seed)
    except (ValueError, SolverError) as exc:
        _fail(EXIT_BAD_INPUT, str(exc))
    edge_sets: dict[str, list] = {"x": [], "z": [], "xx": [], "zz": []}
    items = []
    flagged = False
    for e in encoded:
        edge_sets[e.family].append(list(e.qubits))
        items.append({
            "family": e.family,
            "indices": list(e.indices),
            "qubits": list(e.qubits),
            "coefficient": e.coefficient,
            "alpha": e.alpha,
            "rescaled": e.rescaled,
            "error": e.error,
        })
        flagged = flagged or bool(e.error)
    doc = {"terms": items, "edge_sets": edge_sets}
    _emit(doc, out, _meta({"command": "encode", "m": m, "l": l, "in": os.path.basename(infile)}, seed=seed))
    if flagged:
        sys.exit(EXIT_VALIDATION)


if __name__ == "__main__":  # pragma: no cover
    main()
