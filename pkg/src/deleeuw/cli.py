"""Command-line front end: ``deleeuw {analyze,bound,estimate,verify,sweep,catalog}``.

All numerics live in the library; this module parses inputs, dispatches and
formats output.  Exit codes: 0 success, 2 invalid input, 3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import catalog
from .bounds import (BoundCertificate, c_lower, certify, character_shift_bound, rescaled_split_bound,
                     trivial_bound, trivial_bound_box)
from .errors import DeLeeuwError, ValidationError
from .lie import (LieAlgebra, Subspace, derived_series, frame, is_unimodular, max_nilpotent_orbit_dim,
                  radical, subalgebra)
from .neighborhoods import Ball, Box, LogProduct, SplitChain, exact_log_product_volume, parse_family
from .oracle import (group_level_delta, mc_delta, mc_volume, random_group_samples, shrink_set_delta,
                     split_estimates)
from .reps import Character, Representation, adjoint_representation, weight_decomposition

EXIT_OK, EXIT_INVALID, EXIT_VERIFY = 0, 2, 3


class Problem:
    """Everything a command needs: algebra, representation, F and optional extras."""

    def __init__(self, name, algebra, rep, theta=None, split=None, entry=None):
        self.name = name
        self.algebra = algebra
        self.rep = rep
        self.theta = theta
        self.split = split
        self.entry = entry

    @property
    def is_adjoint(self) -> bool:
        return self.rep.dim == self.algebra.dim and np.allclose(self.rep.action, self.algebra.ad_basis())


def _read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    except OSError as exc:
        raise ValidationError(f"{path}: {exc.strerror}") from exc


def load_problem(args) -> Problem:
    if getattr(args, "entry", None):
        if args.algebra or getattr(args, "rep", None):
            raise ValidationError("give either --entry or --algebra/--rep, not both")
        e = catalog.get(args.entry, getattr(args, "t", None))
        return Problem(e.name, e.algebra, e.rep, e.theta, e.split, e)
    if not args.algebra:
        raise ValidationError("an algebra is required (--entry NAME or --algebra FILE)")
    adata = _read_json(args.algebra)
    try:
        L = LieAlgebra.from_dict(adata)
    except DeLeeuwError as exc:
        raise ValidationError(f"{args.algebra}: {exc}") from exc
    rdata = _read_json(args.rep) if getattr(args, "rep", None) else {}
    where = args.rep or args.algebra
    try:
        if "action" in rdata:
            R = Representation.from_dict(rdata, L)
        else:
            gens = [(g["label"], np.array(g["x"], dtype=float), float(g.get("t", 1.0)))
                    for g in rdata.get("generators", [])]
            R = adjoint_representation(L, gens)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"{where}: malformed representation ({exc})") from exc
    theta = rdata.get("theta", adata.get("theta"))
    split = rdata.get("split", adata.get("split"))
    split = Subspace.spanned_by(np.array(split, dtype=float), R.dim) if split else None
    return Problem(adata.get("name", "custom"), L, R, None if theta is None else np.array(theta, float), split)


# --- output -----------------------------------------------------------------


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _emit(args, text: str):
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(["" if v is None else (repr(float(v)) if isinstance(v, (float, np.floating)) else v) for v in r])
    return buf.getvalue()


# --- analyze ------------------------------------------------------------------


def analyze(args) -> int:
    P = load_problem(args)
    L = P.algebra
    series = derived_series(L)
    rad = radical(L)
    uni = is_unimodular(L)
    report = {
        "name": P.name,
        "dim": L.dim,
        "basis": list(L.basis_names),
        "derived_ranks": series.ranks,
        "solvable": series.solvable,
        "radical_dim": rad.rank,
        "radical_basis": np.round(rad.basis, 12).tolist(),
        "unimodular": bool(uni),
        "warnings": [],
    }
    if not uni:
        report["warnings"].append(
            f"NotUnimodular: trace(ad {L.basis_names[uni.index]}) = {uni.trace:.6g}")
    if rad.rank == 0:
        report["type"] = "semisimple"
        report["d"] = max_nilpotent_orbit_dim(L)
    elif rad.rank == L.dim:
        report["type"] = "solvable"
    else:
        report["type"] = "mixed"
    if rad.rank:
        Lr = subalgebra(L, rad)
        Rr = Representation(Lr, Lr.ad_basis(), ())
        table = []
        try:
            for lvl in weight_decomposition(Rr, derived_series(Lr).terms):
                for lam, space in lvl.weights:
                    table.append({"level": lvl.level,
                                  "weight": [[round(float(z.real), 9), round(float(z.imag), 9)] for z in lam],
                                  "multiplicity": space.rank})
        except DeLeeuwError as exc:
            report["warnings"].append(f"{type(exc).__name__}: {exc}")
        report["weights"] = table
    if args.format == "json":
        _emit(args, _dump_json(report))
    else:
        lines = [f"{k}: {v}" for k, v in report.items() if k not in ("weights", "warnings", "radical_basis")]
        for row in report.get("weights", []):
            lines.append(f"  level {row['level']}: weight {row['weight']} x{row['multiplicity']}")
        lines += [f"warning: {w}" for w in report["warnings"]]
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


# --- bound --------------------------------------------------------------------


def make_certificate(P: Problem, method: str = "pipeline", chi: str = "det") -> BoundCertificate:
    if method == "pipeline":
        return certify(P.algebra, P.rep, P.theta)
    if method == "trivial":
        return trivial_bound(P.rep)
    if P.split is None:
        raise ValidationError(f"method {method!r} needs an invariant subspace (split)")
    if method == "rescaled-split":
        return rescaled_split_bound(P.rep, P.split)
    if method == "character-shift":
        character = Character.trivial(P.rep) if chi == "one" else None
        return character_shift_bound(P.rep, P.split, character)
    raise ValidationError(f"unknown method {method!r}")


def bound(args) -> int:
    P = load_problem(args)
    cert = make_certificate(P, args.method, args.chi)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(cert.to_json())
    if args.format == "json" and not args.out:
        sys.stdout.write(cert.to_json())
    else:
        sys.stdout.write(f"{P.name}: delta >= {cert.value:.10g}, c >= {c_lower(cert):.10g}\n")
        sys.stdout.write(cert.render() + "\n")
    return EXIT_OK


# --- estimate / verify ------------------------------------------------------------


def _family(P: Problem, text: str, seed: int):
    H = None
    if text.strip().lower().startswith("orbitcap"):
        params = dict(p.split("=", 1) for p in text.partition(":")[2].split(",") if "=" in p)
        count = int(float(params.get("H", 16)))
        H = random_group_samples(P.rep, max(count, 1), float(params.get("hr", 2.0)), seed)
    split_dim = P.split.rank if P.split is not None else None
    return parse_family(text, P.rep.dim, split_dim, H)


def _frame_for(P: Problem, spec):
    if isinstance(spec, (LogProduct, SplitChain)):
        return frame(P.split)
    return None


def _estimate(P: Problem, text: str, args):
    spec = _family(P, text, args.seed)
    est = mc_delta(P.rep, spec, args.samples, args.seed, frame=_frame_for(P, spec), workers=args.workers)
    return spec, est


def estimate(args) -> int:
    P = load_problem(args)
    fams = args.family or ["ball:r=1"]
    rows = []
    for text in fams:
        _, est = _estimate(P, text, args)
        rows.append(dict(est.to_dict(), family=text))
    if args.format == "csv":
        _emit(args, _csv(["family-parameter", "value", "stderr", "samples", "seed"],
                         [[r["family"], r["value"], r["stderr"], r["samples"], r["seed"]] for r in rows]))
    elif args.format == "text":
        _emit(args, "".join(f"{r['family']}: {r['value']:.6f} ± {r['stderr']:.2g} (n={r['samples']})\n" for r in rows))
    else:
        _emit(args, _dump_json({"name": P.name, "estimates": rows}))
    return EXIT_OK


def verify_rows(P: Problem, families, samples: int, seed: int, sigma: float, workers: int = 1,
                cert_value: float | None = None):
    """One row per family: the estimate against the bound that is valid for that family."""
    pipeline = None
    rows = []
    for text in families:
        spec = _family(P, text, seed)
        if cert_value is not None:
            ref, rule = float(cert_value), "supplied"
        elif isinstance(spec, Ball):
            c = trivial_bound(P.rep)
            ref, rule = c.value, "TrivialBound (euclidean ball)"
        elif isinstance(spec, Box):
            c = trivial_bound_box(P.rep, spec.half_widths())
            ref, rule = c.value, "TrivialBound (box sup-norm)"
        elif isinstance(spec, SplitChain):
            s = split_estimates(P.rep, P.split, spec.W, spec.Q, spec.eps, samples, seed, workers)
            est = s.total
            ref, rule = s.lower, "Reduction (finite eps)"
            sd = s.sigma("lower")
            rows.append(_row(text, est, ref, rule, sd, sigma))
            continue
        else:
            pipeline = pipeline or certify(P.algebra, P.rep, P.theta)
            ref, rule = pipeline.value, f"{pipeline.rule} (eps -> 0 limit)"
        est = mc_delta(P.rep, spec, samples, seed, frame=_frame_for(P, spec), workers=workers)
        rows.append(_row(text, est, ref, rule, est.stderr, sigma))
    return rows


def _row(text, est, ref, rule, sd, k):
    ok = est.value >= ref - k * sd
    return {"family": text, "estimate": est.value, "stderr": sd, "bound": ref, "rule": rule,
            "samples": est.samples, "seed": est.seed, "status": "PASS" if ok else "FAIL"}


def verify(args) -> int:
    P = load_problem(args)
    cert_value = None
    if args.cert:
        data = _read_json(args.cert)
        try:
            cert_value = float(data["value"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"{args.cert}: certificate has no numeric value") from exc
    rows = verify_rows(P, args.family or ["ball:r=1"], args.samples, args.seed, args.sigma, args.workers,
                       cert_value)
    if args.format == "json":
        _emit(args, _dump_json({"name": P.name, "sigma": args.sigma, "rows": rows}))
    elif args.format == "csv":
        keys = ["family", "estimate", "stderr", "bound", "rule", "samples", "seed", "status"]
        _emit(args, _csv(keys, [[r[k] for k in keys] for r in rows]))
    else:
        lines = [f"{r['status']}  {r['family']:<28} est {r['estimate']:.6f} ± {r['stderr']:.2g}  "
                 f"bound {r['bound']:.6g}  [{r['rule']}]" for r in rows]
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK if all(r["status"] == "PASS" for r in rows) else EXIT_VERIFY


# --- sweep ---------------------------------------------------------------------


def _grid(text, default):
    if not text:
        return default
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ValidationError(f"grid must be comma-separated numbers, got {text!r}") from exc


def logvol_draws(count: int, seed: int):
    """Random log-product parameters with d1, d2 <= 3 and eps not far below its maximum."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        d1, d2 = (int(v) for v in rng.integers(1, 4, size=2))
        kinds = [str(k) for k in rng.choice(["ball", "box"], size=2)]
        R1, R2 = (float(v) for v in rng.uniform(0.5, 2.0, size=2))
        top = R1 ** d1 * R2 ** d2
        eps = float(top * 10 ** rng.uniform(-1.0, -0.05))
        out.append((d1, d2, kinds, R1, R2, eps))
    return out


def sweep(args) -> int:
    P = None if args.axis == "logvol" else load_problem(args)
    rows = []
    header = ["family-parameter", "value", "stderr", "samples", "seed", "reference"]
    if args.axis == "eps":
        template = (args.family or ["split"])[0]
        kind, _, body = template.partition(":")
        rest = [t for t in body.split(",") if t.strip() and not t.strip().startswith("eps=")]
        for eps in _grid(args.grid, [1e-1, 1e-2, 1e-3, 1e-4, 1e-5]):
            _, est = _estimate(P, f"{kind}:" + ",".join(rest + [f"eps={eps!r}"]), args)
            rows.append([f"eps={eps!r}", est.value, est.stderr, est.samples, est.seed, None])
    elif args.axis == "chart":
        fam = (args.family or ["ball:r=1"])[0]
        spec = _family(P, fam, args.seed)
        ref = mc_delta(P.rep, spec, args.samples, args.seed, workers=args.workers)
        kw = {}
        if P.entry is not None and P.entry.realization is not None and P.name != "diag_r2":
            kw = {"realization": P.entry.realization, "group_matrices": P.entry.realized_group()}
        for c in _grid(args.grid, [0.2, 0.1, 0.05]):
            est = group_level_delta(P.rep, spec, c, args.samples, args.seed, workers=args.workers, **kw)
            rows.append([f"chart_scale={c!r}", est.value, est.stderr, est.samples, est.seed, ref.value])
    elif args.axis == "r":
        fam = (args.family or ["ball:r=1"])[0]
        spec = _family(P, fam, args.seed)
        ref = shrink_set_delta(P.rep, spec, 0.0, args.samples, args.seed + 1, workers=args.workers)
        for r in _grid(args.grid, [1e-1, 1e-2, 1e-3]):
            est = shrink_set_delta(P.rep, spec, r, args.samples, args.seed, workers=args.workers)
            rows.append([f"r={r!r}", est.volume, est.volume_stderr, est.samples, est.seed, ref.volume])
    elif args.axis == "logvol":
        for i, (d1, d2, kinds, R1, R2, eps) in enumerate(logvol_draws(args.draws, args.seed)):
            U = Ball(1.0, d1) if kinds[0] == "ball" else Box((1.0,) * d1)
            V = Ball(1.0, d2) if kinds[1] == "ball" else Box((1.0,) * d2)
            spec = LogProduct(U, V, R1, R2, eps)
            est = mc_volume(spec, args.samples, args.seed + i, workers=args.workers)
            exact = exact_log_product_volume(d1, d2, U.volume(), V.volume(), R1, R2, eps)
            label = f"{kinds[0]}{d1}x{kinds[1]}{d2};R1={R1:.6g};R2={R2:.6g};eps={eps:.6g}"
            rows.append([label, est.volume, est.volume_stderr, est.samples, est.seed, exact])
    else:
        raise ValidationError(f"unknown sweep axis {args.axis!r}")
    if args.format == "json":
        _emit(args, _dump_json([dict(zip(header, r)) for r in rows]))
    else:
        _emit(args, _csv(header, rows))
    return EXIT_OK


# --- catalog -------------------------------------------------------------------


def catalog_cmd(args) -> int:
    if args.action == "list":
        lines = [f"{n}: {catalog.get(n).notes}" for n in catalog.names()]
        _emit(args, "\n".join(lines) + "\n")
        return EXIT_OK
    if not args.name:
        raise ValidationError("catalog export needs an entry name")
    _emit(args, _dump_json(catalog.get(args.name).to_dict()))
    return EXIT_OK


# --- argument parsing ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="deleeuw", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def inputs(sp, rep=True):
        sp.add_argument("--entry", help="catalog entry name")
        sp.add_argument("--algebra", help="algebra JSON file")
        if rep:
            sp.add_argument("--rep", help="representation JSON file (action + F, or adjoint generators)")
        sp.add_argument("--t", type=float, help="override the catalog generator scale")
        sp.add_argument("--out", help="output file (default stdout)")

    def sampling(sp):
        sp.add_argument("--family", action="append", help="neighbourhood family, e.g. ball:r=1 (repeatable)")
        sp.add_argument("--samples", type=int, default=1_000_000)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--workers", type=int, default=1)

    a = sub.add_parser("analyze", help="structure report")
    inputs(a)
    a.add_argument("--format", choices=["json", "text"], default="text")

    b = sub.add_parser("bound", help="certified lower bound and proof tree")
    inputs(b)
    b.add_argument("--method", choices=["pipeline", "trivial", "rescaled-split", "character-shift"],
                   default="pipeline")
    b.add_argument("--chi", choices=["det", "one"], default="det",
                   help="character for character-shift: det of the sub-representation, or trivial")
    b.add_argument("--format", choices=["json", "text"], default="text")

    e = sub.add_parser("estimate", help="Monte Carlo estimates of delta")
    inputs(e)
    sampling(e)
    e.add_argument("--format", choices=["json", "text", "csv"], default="json")

    v = sub.add_parser("verify", help="estimates against certified bounds")
    inputs(v)
    sampling(v)
    v.add_argument("--sigma", type=float, default=3.0)
    v.add_argument("--cert", help="certificate JSON whose value replaces the computed bounds")
    v.add_argument("--format", choices=["json", "text", "csv"], default="text")

    s = sub.add_parser("sweep", help="parameter sweep to CSV")
    inputs(s)
    sampling(s)
    s.add_argument("--axis", choices=["eps", "chart", "r", "logvol"], required=True)
    s.add_argument("--grid", help="comma-separated grid values")
    s.add_argument("--draws", type=int, default=10, help="number of random draws for --axis logvol")
    s.add_argument("--format", choices=["csv", "json"], default="csv")

    c = sub.add_parser("catalog", help="list or export built-in examples")
    c.add_argument("action", choices=["list", "export"])
    c.add_argument("name", nargs="?")
    c.add_argument("--out")
    return p


def _check_config(args):
    if hasattr(args, "samples") and args.samples < 1000:
        raise ValidationError("--samples must be at least 1000")
    if hasattr(args, "sigma") and not 1.0 <= args.sigma <= 6.0:
        raise ValidationError("--sigma must lie in [1, 6]")
    if hasattr(args, "workers") and args.workers < 1:
        raise ValidationError("--workers must be positive")


COMMANDS = {"analyze": analyze, "bound": bound, "estimate": estimate, "verify": verify,
            "sweep": sweep, "catalog": catalog_cmd}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _check_config(args)
        return COMMANDS[args.command](args)
    except DeLeeuwError as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
