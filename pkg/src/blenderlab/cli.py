"""Batch runner: ``blenderlab SUBCOMMAND [--config PATH] [--out DIR] ...``.

Every subcommand writes machine-readable reports (JSON, plus CSV where rows
make sense) into ``--out`` and a short plain-text summary to standard output.
Reports contain no timings; wall-clock data goes to the sidecar ``run.log``.

Exit status: 0 success, 2 indeterminate (search budget exhausted, partial
report written), 1 error (bad configuration or failed computation).
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
import warnings
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import config as cfgmod

OK, ERROR, INDETERMINATE = 0, 1, 2
SUBCOMMANDS = ("classify", "blender", "invariants", "census", "randwords", "flatpoint", "germ-demo")


class Indeterminate(Exception):
    """Carries a partial report when a budget runs out."""

    def __init__(self, msg, report=None):
        super().__init__(msg)
        self.report = report or {}


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, Fractions to strings, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, Fraction):
        return str(obj)
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def _write_json(out: Path, name: str, data) -> Path:
    path = out / name
    path.write_text(json.dumps(_clean(data), indent=2, sort_keys=True) + "\n")
    return path


def _pair(rho, J, want=None):
    from .invariants import repeller_attractor_pairs

    pairs = [pr for pr in repeller_attractor_pairs(rho[0])
             if J[0] < min(pr.p, pr.q) and max(pr.p, pr.q) < J[1]]
    if want is None:
        return pairs
    p, q = want
    for pr in pairs:
        if abs(pr.p - p) < 1e-6 and abs(pr.q - q) < 1e-6:
            return pr
    raise ValueError(f"no repeller-attractor pair near ({p}, {q}) inside J")


# ---------------------------------------------------------------- subcommands


def cmd_classify(cfg, rho, J, args, out):
    from .semigroup import membership_report

    c = cfg["classify"]
    rep = membership_report(rho, J, c["w_sharp_grid"], c["w_sharp_depth"],
                            blender_letters=tuple(cfg.get("blender_letters", (1, 2))))
    _write_json(out, "classify.json", rep)
    lines = [f"{k}: {'yes' if rep[k]['flag'] else 'no'}" for k in ("W1", "SignI", "SignII", "W_att", "W_sharp")]
    lines.append(f"all: {'yes' if rep['all'] else 'no'}")
    if not rep["W_sharp"]["flag"]:
        raise Indeterminate("orbit entry into J not established within the depth budget", rep)
    return lines


def cmd_blender(cfg, rho, J, args, out):
    from .semigroup import attracting_fixed_point, check_blender_criterion, empirical_blender_density

    letters = tuple(cfg.get("blender_letters", (1, 2)))
    f1, f2 = rho[letters[0]], rho[letters[1]]
    cert = check_blender_criterion(f1, f2, attracting_fixed_point(f1), attracting_fixed_point(f2), J)
    dens = empirical_blender_density([f1, f2], J, cfg["blender"]["eps"], letters=letters,
                                     max_length=cfg["blender"]["max_length"])
    rep = {"criterion": cert.to_dict(), "density": dens}
    _write_json(out, "blender.json", rep)
    lines = [f"criterion certified: {cert.certified}", f"density eps={dens['eps']:g}: "
             f"{'ok' if dens['success'] else 'failed'} (max distance {dens['max_distance']:.3e})"]
    if not dens["success"]:
        raise Indeterminate("density not reached within the word-length budget", rep)
    return lines


def cmd_invariants(cfg, rho, J, args, out):
    from .invariants import InvariantError, fundamental_domain_samples, koenigs, transition_invariants

    c = cfg["invariants"]
    tol = cfg["run"]["tolerance"]
    f0 = rho[0]
    rows, failed = [], []
    for pr in _pair(rho, J):
        lo, hi = pr.heteroclinic_interval
        zs = [z for z in c.get("z0", []) if lo < z < hi]
        if not zs:
            zs = [float(z) for z in fundamental_domain_samples(f0, pr, c["samples_per_pair"])]
        phi = koenigs(f0, pr.p, pr.lam_p, interval=(lo, hi))
        psi = koenigs(f0, pr.q, pr.lam_q, interval=(lo, hi))
        for z in zs:
            try:
                r = transition_invariants(f0, pr, z, tol=tol, n_max=c["n_max"])
            except InvariantError as exc:
                failed.append({"pair": pr.to_dict(), "z0": z, "reason": str(exc)})
                continue
            pts = np.array([z, float(f0(z))])
            rows.append({"pair": pr.to_dict(), "z0": z, "A": r.A_value, "S": r.S_value,
                         "tau_A": r.tau_A, "tau_S": r.tau_S, "n_used": r.n_used,
                         "A_normalized": r.A_normalized, "S_normalized": r.S_normalized,
                         "residuals": {**r.convergence_estimate,
                                       "koenigs_equivariance_p": phi.equivariance_residual(pts),
                                       "koenigs_equivariance_q": psi.equivariance_residual(pts)},
                         "indeterminate": r.indeterminate})
    rep = {"tolerance": tol, "reports": rows, "failed": failed}
    _write_json(out, "invariants.json", rep)
    lines = [f"pair ({row['pair']['p']:.6g}, {row['pair']['q']:.6g}) z0={row['z0']:.6g}: "
             f"A={row['A']:.6g} S={row['S']:.6g} tau=({row['tau_A']:+d}, {row['tau_S']:+d})" for row in rows]
    if failed or any(row["indeterminate"] for row in rows):
        raise Indeterminate("some invariants did not converge or have undetermined signs", rep)
    return lines


def cmd_census(cfg, rho, J, args, out):
    from .semigroup import Word, brute_force_fix_a, growth_census

    c = cfg["census"]
    n_max = args.n if args.n is not None else c["n_max"]
    rep = growth_census(rho, n_max, c["resolution"], cfg["run"]["workers"], c["max_words"])
    data = rep.to_dict()
    data["convention"] = "the empty word is excluded"
    if c["brute_force"]:
        bf = {}
        for w, n, _, _, _ in rep.rows:
            bf[n] = bf.get(n, 0) + brute_force_fix_a(rho.word_map(Word.parse(w)), c["brute_force"])
        data["brute_force"] = {"points": c["brute_force"], "totals": {str(k): v for k, v in bf.items()},
                               "match": all(bf[k] == rep.totals[k] for k in rep.totals)}
    (out / "census.csv").write_text(rep.to_csv())
    _write_json(out, "census.json", data)
    lines = [f"n={n}: sum #Fix_a = {t}" for n, t in sorted(rep.totals.items())]
    if rep.partial:
        raise Indeterminate("word budget exhausted", data)
    return lines


def cmd_randwords(cfg, rho, J, args, out):
    from .semigroup import random_word_experiment

    c = cfg["randwords"]
    n = args.n if args.n is not None else c["n"]
    rep = random_word_experiment(rho, n, c["trials"], cfg["run"]["seed"], c["grid"], c["resolution"])
    _write_json(out, "randwords.json", rep)
    counts = sorted({t["fix_count"] for t in rep["trials_data"] if t["fix_count"] is not None})
    return [f"n={n} trials={rep['trials']} seed={rep['seed']}",
            f"max sup-derivative root {rep['max_root']:.6g} vs generator bound {rep['bound']:.6g}"
            if rep["max_root"] is not None else "empty words only",
            f"final fixed-point counts: {counts}"]


def cmd_flatpoint(cfg, rho, J, args, out):
    from .flatpoint import (FlatPointError, construct_one_flat, identity_window, orchestrate_two_flat,
                            seed_attractors)

    c = cfg["flatpoint"]
    tol = cfg["run"]["tolerance"]
    letters = tuple(cfg.get("blender_letters", (1, 2)))
    rep = {}
    try:
        pair = _pair(rho, J, c["pair"])
        cert = construct_one_flat(rho, pair, c["z_star"], U=c.get("U"), min_period=c["min_period"],
                                  target_log=c["target_log"], J=J, blender_letters=letters)
        rep["certificate"] = cert.to_dict()
        iw = identity_window(cert)
        rep["identity_window"] = iw.to_dict()
        if iw.residual >= tol:
            raise Indeterminate(f"identity window residual {iw.residual:.3e} above tolerance", rep)
        fix, seeded = seed_attractors(iw, c["count"], resolution=c["resolution"])
        rep["seeded"] = {"n_attracting": fix.n_attracting, "n_fixed": len(fix.points),
                         "count": c["count"], "certificate": seeded.to_dict()}
        (out / "fixpoints.csv").write_text(fix.to_csv())
        if "second" in c:
            pair2 = _pair(rho, J, c["second"]["pair"])
            cert2 = construct_one_flat(rho, pair2, c["second"]["z_star"], min_period=c["min_period"],
                                       target_log=c["second"].get("target_log", c["target_log"]), J=J,
                                       blender_letters=letters)
            rep["second_certificate"] = cert2.to_dict()
            _, two = orchestrate_two_flat(cert, cert2)
            rep["two_flat"] = two
    except FlatPointError as exc:
        rep["error"] = str(exc)
        _write_json(out, "flatpoint.json", rep)
        raise Indeterminate(str(exc), rep) from None
    _write_json(out, "flatpoint.json", rep)
    d = cert.details
    lines = [f"p_hat={cert.p_hat:.12g} |0 gamma|={len(cert.word)} m={d['m']} n={d['n']} s={d['s']:.6g}",
             f"derivative residual {cert.derivative_residual:.3e}, periodicity residual "
             f"{cert.periodicity_residual:.3e}, signs {cert.signs} (tau {d['tau_A']:+d}, {d['tau_S']:+d})",
             f"identity window width {iw.width:.3e}, residual {iw.residual:.3e}",
             f"attracting fixed points in window: {fix.n_attracting} (requested {c['count']})"]
    if "two_flat" in rep:
        lines.append(f"two-flat composition: A={rep['two_flat']['A_composed']:.3e}, "
                     f"S={rep['two_flat']['S_composed']:.6g}")
    return lines


def _scalar(text: str, exact: bool):
    if exact:
        return Fraction(text)
    return float(Fraction(text)) if "/" in text else float(text)


def cmd_germ_demo(cfg, rho, J, args, out):
    from .germs import CancellationError, commutator_cancel, next_order_cancel, two_flat_cancel
    from .jets import Jet

    c = dict(cfg["germ_demo"])
    for key in ("F1", "F2", "alpha", "beta", "lemma"):
        if getattr(args, key, None) is not None:
            c[key] = getattr(args, key)
    exact = c["exact"]

    def jet(text):
        j = Jet.parse(text)
        return j.to_exact() if exact else j.to_float()

    alpha = _scalar(c["alpha"], exact)
    try:
        if c["lemma"] == "two_flat":
            res = two_flat_cancel(jet(c["F1"]), jet(c["F2"]), alpha, _scalar(c["beta"], exact))
        elif c["lemma"] == "next_order":
            res = next_order_cancel(jet(c["F1"]), jet(c["F2"]), alpha, c["r"])
        else:
            if "F" not in c:
                raise cfgmod.ConfigError("commutator lemma needs four jets under germ_demo.F")
            res = commutator_cancel([jet(t) for t in c["F"]], float(alpha), c["r"])
    except CancellationError as exc:
        raise Indeterminate(str(exc), {"lemma": c["lemma"], "error": str(exc)}) from None
    data = {"lemma": c["lemma"], **res.to_dict()}
    _write_json(out, "germ_demo.json", data)
    return [json.dumps(_clean(data), sort_keys=True)]


COMMANDS = {"classify": cmd_classify, "blender": cmd_blender, "invariants": cmd_invariants,
            "census": cmd_census, "randwords": cmd_randwords, "flatpoint": cmd_flatpoint,
            "germ-demo": cmd_germ_demo}


# ---------------------------------------------------------------- entry point


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("tolerance must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None,
                        help="JSON experiment file (default: the bundled example)")
    common.add_argument("--out", type=Path, default=Path("blenderlab-out"), help="report directory")
    common.add_argument("--workers", type=int, default=None, help="worker processes for data-parallel work")
    common.add_argument("--seed", type=_u64, default=None, help="unsigned 64-bit seed")
    common.add_argument("--tolerance", type=_positive_float, default=None, help="numerical tolerance")
    parser = argparse.ArgumentParser(prog="blenderlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name in ("census", "randwords"):
            sp.add_argument("--n", type=int, default=None, help="word length (census: maximum length)")
        if name == "germ-demo":
            sp.add_argument("--lemma", choices=["two_flat", "next_order", "commutator"], default=None)
            sp.add_argument("--F1", default=None, help='jet literal "c1 c2 ... cr"')
            sp.add_argument("--F2", default=None, help='jet literal "c1 c2 ... cr"')
            sp.add_argument("--alpha", default=None)
            sp.add_argument("--beta", default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = time.perf_counter()
    try:
        cfg = cfgmod.load(args.config)
        for key in ("seed", "workers", "tolerance"):
            if getattr(args, key) is not None:
                cfg["run"][key] = getattr(args, key)
        if cfg["run"]["workers"] < 1:
            raise cfgmod.ConfigError("workers must be >= 1")
        out = args.out
        out.mkdir(parents=True, exist_ok=True)
        rho, J = cfgmod.build_semigroup(cfg)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            lines = COMMANDS[args.command](cfg, rho, J, args, out)
        status = OK
    except Indeterminate as exc:
        lines, status = [f"indeterminate: {exc}"], INDETERMINATE
        if exc.report:
            _write_json(args.out, f"{args.command.replace('-', '_')}.partial.json", exc.report)
    except (cfgmod.ConfigError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ERROR
    for line in lines:
        print(line)
    try:
        stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
        with open(args.out / "run.log", "a") as log:
            log.write(f"{stamp} {args.command} status={status} seconds={time.perf_counter() - started:.3f}\n")
    except OSError:
        pass
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
