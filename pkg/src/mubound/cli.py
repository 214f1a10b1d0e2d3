"""Command line interface: ``mubound <command> [options]``.

Exit status: 0 on success (inconclusive verdicts included), 1 when an
internal invariant fails, 2 for configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import random
import sys
from fractions import Fraction
from typing import List, Optional, Sequence

from . import __version__
from .cache import SymbolCache
from .config import ConfigError, RunConfig, ingest_curves, parse_curve
from .contfrac import check_manin_path, lame_bound, manin_path
from .curve import CurveError, CurveModel, NotOrdinaryError
from .cyclotomic import char_group, char_sum_vanishing, gauss_identity_failures
from .kernels import BACKEND
from .padic_l import (CoherenceError, PadicError, PadicLFunction, PrecisionExhausted,
                      ScanRow, mu_lambda_estimate, scan_primes, to_power_series)
from .periods import PeriodEngine, PeriodError, hecke_identity_failures

log = logging.getLogger("mubound")


class InvariantFailure(RuntimeError):
    pass


def _frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


# -- engine and cache ---------------------------------------------------------

class Session:
    """Engines per curve, backed by the symbol cache."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.cache = SymbolCache(cfg.cache_dir) if cfg.use_cache else None
        self.engines = {}

    def engine(self, curve: CurveModel) -> PeriodEngine:
        key = curve.fingerprint()
        if key not in self.engines:
            table = self.cache.load(curve) if self.cache else None
            self.engines[key] = PeriodEngine(curve, tol=self.cfg.tol, Qmax=self.cfg.Qmax,
                                             seed=self.cfg.seed, table=table)
        return self.engines[key]

    def close(self) -> None:
        if not self.cache:
            return
        for eng in self.engines.values():
            try:
                self.cache.save(eng.curve, eng.symbols)
            except OSError as exc:
                log.warning("could not write cache: %s", exc)


def _provenance(curve: CurveModel, cfg: RunConfig) -> dict:
    return {"curve": curve.name, "ainvs": list(curve.ainvs), "N": curve.N,
            "fingerprint": curve.fingerprint(), "tol": cfg.tol, "Qmax": cfg.Qmax,
            "seed": cfg.seed}


# -- commands -------------------------------------------------------------------

def cmd_symbols(cfg: RunConfig, args, out, session: Session) -> int:
    dens = sorted(set(args.den or []) | set(range(1, (args.upto or 0) + 1)))
    if not dens:
        raise ConfigError("give --den or --upto")
    for curve in cfg.curves:
        eng = session.engine(curve)
        out.write(f"# {curve.name} N={curve.N}\n")
        for m in dens:
            if math.gcd(m, curve.N) != 1:
                continue
            for a in range(0, m // 2 + 1):
                if math.gcd(a, m) == 1:
                    out.write(f"{a}/{m} = {_frac(eng.modular_symbol(Fraction(a, m)))}\n")
    return 0


def cmd_theta(cfg: RunConfig, args, out, session: Session) -> int:
    k = cfg.k if cfg.k is not None else 3
    for curve in cfg.curves:
        L = PadicLFunction(session.engine(curve), cfg.p)
        th = L.theta(cfg.n, k, mode=args.mode, gen_power=args.gen_power)
        out.write(f"curve {curve.name} p {cfg.p} n {cfg.n} k {k} mode {th.mode} "
                  f"generator (1+p)^{th.gen_power}\n")
        out.write("coeffs " + " ".join(map(str, th.coeffs)) + "\n")
        out.write("series " + " ".join(map(str, to_power_series(th))) + "\n")
        try:
            est = mu_lambda_estimate(th)
            out.write(f"mu~ {est.mu} lambda~ {est.lam}\n")
        except PrecisionExhausted as exc:
            out.write(f"mu~ >= {k} ({exc})\n")
    return 0


def _report_dict(rep, curve: CurveModel, cfg: RunConfig) -> dict:
    d = {"provenance": _provenance(curve, cfg), "p": rep.p, "a_p": rep.a_p,
         "alpha_residue": rep.alpha, "k": rep.k, "mode": rep.mode, "r": rep.r,
         "n_max": rep.n_max, "levels": rep.levels,
         "witness": list(rep.witness) if rep.witness else None,
         "valuation": rep.valuation, "certified": rep.certified, "verdict": rep.verdict,
         "ap_mode_sum": _frac(rep.ap_sum) if rep.ap_sum is not None else None,
         "ap_mode_valuation": None if rep.ap_valuation is None or rep.ap_valuation == math.inf
         else rep.ap_valuation,
         "reducible_hint": rep.p_in_denominator}
    if rep.audit:
        a = rep.audit
        d["audit"] = {"delta": a.delta, "delta_S": a.delta_S, "p_squared": a.p_squared,
                      "below_p_squared": a.below_p_squared, "hasse_ok": a.hasse_ok,
                      "p_divides_delta": a.p_divides_delta}
    return d


def _report_text(d: dict) -> str:
    pv = d["provenance"]
    lines = [
        f"curve       {pv['curve']}  ainvs {pv['ainvs']}  N {pv['N']}  id {pv['fingerprint']}",
        f"precision   tol {pv['tol']:g}  Qmax {pv['Qmax']}  k {d['k']}  seed {pv['seed']}",
        f"prime       p {d['p']}  a_p {d['a_p']}  alpha = {d['alpha_residue']} mod {d['p']}^{d['k']}",
        f"search      r {d['r']}  n_max {d['n_max']}  levels {d['levels']}  mode {d['mode']}",
    ]
    if d["witness"]:
        n, a = d["witness"]
        lines.append(f"witness     n {n}  a {a}  v_p(S) {d['valuation']}")
        lines.append(f"a_p-mode    S {d['ap_mode_sum']}  v_p {d['ap_mode_valuation']}")
    else:
        lines.append(f"witness     none  (all sums divisible by p^{d['r'] + 1})")
    if "audit" in d:
        a = d["audit"]
        lines.append(f"audit       delta {a['delta']}  delta*S {a['delta_S']}  p^2 {a['p_squared']}  "
                     f"below p^2 {'yes' if a['below_p_squared'] else 'no'}  "
                     f"Hasse {'ok' if a['hasse_ok'] else 'FAILED'}")
    if d["reducible_hint"]:
        lines.append("note        p divides some symbol denominators (E[p] probably reducible)")
    lines.append(f"verdict     {d['verdict']}")
    return "\n".join(lines) + "\n"


def cmd_mu_check(cfg: RunConfig, args, out, session: Session) -> int:
    reports = []
    for curve in cfg.curves:
        L = PadicLFunction(session.engine(curve), cfg.p)
        rep = L.mu_witness_search(cfg.r, cfg.n_max, k=cfg.precision)
        if rep.audit and not rep.audit.hasse_ok:
            raise InvariantFailure(f"Hasse bound fails for a_{cfg.p}={rep.a_p}")
        reports.append(_report_dict(rep, curve, cfg))
    if cfg.output == "json":
        json.dump(reports if len(reports) > 1 else reports[0], out, indent=2, sort_keys=True)
        out.write("\n")
    else:
        out.write("\n".join(_report_text(d) for d in reports))
    return 0


def cmd_scan(cfg: RunConfig, args, out, session: Session) -> int:
    if cfg.p_max is None:
        raise ConfigError("--pmax is required")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(("curve",) + ScanRow.FIELDS)
    for curve in cfg.curves:
        rows = scan_primes(session.engine(curve), cfg.p_max, cfg.r, cfg.n_max, cfg.p_min)
        for row in rows:
            w.writerow((curve.name,) + row.as_row())
    return 0


def cmd_verify_bounds(cfg: RunConfig, args, out, session: Session) -> int:
    N = args.level if args.level is not None else (cfg.curves[0].N if cfg.curves else None)
    if N is None:
        raise ConfigError("give --level or --curve")
    rng = random.Random(cfg.seed)
    try:
        sample = [Fraction(s) for s in args.rationals or []]
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad rational: {exc}") from None
    for _ in range(args.count):
        m = rng.randint(1, args.max_den)
        sample.append(Fraction(rng.randrange(0, m), m))
    w = csv.writer(out, lineterminator="\n")
    w.writerow(("r", "length", "lame_bound", "max_coset_count", "matrices"))
    violations = 0
    for r in sample:
        path = manin_path(r, N)
        check_manin_path(path)
        length = len(path.matrices)
        bound = lame_bound(r.denominator)
        if length > bound or path.max_coset_count > length + 2:
            violations += 1
        w.writerow((_frac(r), length, f"{bound:.6f}", path.max_coset_count, length))
    if violations:
        raise InvariantFailure(f"{violations} bound violations")
    return 0


def _check(out, name: str, ok: bool, detail: str = "") -> bool:
    out.write(f"{'PASS' if ok else 'FAIL'} {name}{': ' + detail if detail else ''}\n")
    return ok


def cmd_selfcheck(cfg: RunConfig, args, out, session: Session) -> int:
    ok = True
    out.write(f"# mubound {__version__} kernels={BACKEND}\n")
    if args.gauss:
        gp, gn = args.gauss
        count, fails = gauss_identity_failures(gp, gn)
        ok &= _check(out, f"gauss identities mod {gp}^{gn}", not fails, f"{count} checked")
    p = cfg.p if cfg.p is not None else 5
    for curve in cfg.curves:
        eng = session.engine(curve)
        tag = f"{curve.name} p={p}"
        try:
            count, fails = hecke_identity_failures(eng, p, 1)
            ok &= _check(out, f"{tag} hecke identity n<=1", not fails,
                         f"{count} checked" + (f", first failure {fails[0]}" if fails else ""))
            if not args.gauss:
                count, fails = gauss_identity_failures(p, 2)
                ok &= _check(out, f"gauss identities mod {p}^2", not fails, f"{count} checked")
            prim = [chi for chi in char_group(p, 2) if chi.is_primitive]
            zero = all(char_sum_vanishing(chi, eng.modular_symbol).is_zero() for chi in prim)
            ok &= _check(out, f"{tag} primitive character sums vanish", zero, f"{len(prim)} characters")
            L = PadicLFunction(eng, p)
            L.check_norm_coherence(1, 4)
            ok &= _check(out, f"{tag} norm coherence n=2->1 k=4", True)
            rep = L.interpolation_check_trivial(2)
            ok &= _check(out, f"{tag} interpolation at trivial character k=2", rep.passed,
                         f"{rep.lhs} = {rep.rhs}")
        except NotOrdinaryError as exc:
            out.write(f"SKIP {tag}: {exc}\n")
        except CoherenceError as exc:
            ok &= _check(out, tag, False, str(exc))
    if not ok:
        raise InvariantFailure("selfcheck failed")
    return 0


COMMANDS = {
    "symbols": cmd_symbols,
    "theta": cmd_theta,
    "mu-check": cmd_mu_check,
    "scan-primes": cmd_scan,
    "verify-bounds": cmd_verify_bounds,
    "selfcheck": cmd_selfcheck,
}


# -- argument parsing -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("curve and precision")
    g.add_argument("--curve", action="append", default=[],
                   help="label (11a, 37a, ...) or a1,a2,a3,a4,a6,N; repeatable")
    g.add_argument("--curves", metavar="CSV", help="batch file of a1,a2,a3,a4,a6,N[,label] rows")
    g.add_argument("--tol", type=float, default=1e-9)
    g.add_argument("--qmax", type=int, default=10_000)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--cache-dir", help="symbol cache directory (default $MUBOUND_CACHE_DIR)")
    g.add_argument("--no-cache", action="store_true")
    g.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(prog="mubound", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("symbols", parents=[common], help="exact modular symbols a/m")
    s.add_argument("--den", type=int, action="append", help="denominator (repeatable)")
    s.add_argument("--upto", type=int, help="all denominators up to this bound")

    s = sub.add_parser("theta", parents=[common], help="theta element at level n")
    s.add_argument("-p", type=int, required=True)
    s.add_argument("-n", type=int, default=1)
    s.add_argument("-k", type=int)
    s.add_argument("--mode", choices=("alpha", "ap"), default="alpha")
    s.add_argument("--gen-power", type=int, default=1)

    s = sub.add_parser("mu-check", parents=[common], help="search for a mu <= r certificate")
    s.add_argument("-p", type=int, required=True)
    s.add_argument("-r", type=int, default=1)
    s.add_argument("--nmax", type=int, default=3)
    s.add_argument("-k", type=int)
    s.add_argument("--format", choices=("text", "json"), default="text")

    s = sub.add_parser("scan-primes", parents=[common], help="CSV of verdicts over primes")
    s.add_argument("--pmax", type=int, required=True)
    s.add_argument("--pmin", type=int, default=3)
    s.add_argument("-r", type=int, default=1)
    s.add_argument("--nmax", type=int, default=2)

    s = sub.add_parser("verify-bounds", parents=[common], help="Lame and coset-count audit")
    s.add_argument("--level", type=int, help="N (defaults to the curve conductor)")
    s.add_argument("--rational", action="append", dest="rationals",
                   help="explicit rational a/m to include (repeatable)")
    s.add_argument("--count", type=int, default=100)
    s.add_argument("--max-den", type=int, default=10**6)

    s = sub.add_parser("selfcheck", parents=[common], help="run the built-in identity checks")
    s.add_argument("-p", type=int)
    s.add_argument("--gauss", type=int, nargs=2, metavar=("P", "N"))

    for sp in sub.choices.values():
        sp.add_argument("-o", "--output", help="write to this file instead of stdout")
    return parser


def config_from_args(args) -> RunConfig:
    curves: List[CurveModel] = [parse_curve(c) for c in args.curve]
    if args.curves:
        try:
            curves += ingest_curves(args.curves)
        except OSError as exc:
            raise ConfigError(str(exc)) from None
    cmd = args.command
    if not curves and cmd not in ("verify-bounds", "selfcheck"):
        raise ConfigError("no curve given (use --curve or --curves)")
    if not curves and cmd == "selfcheck":
        curves = [parse_curve("11a")]
    cfg = RunConfig(curves=curves, tol=args.tol, Qmax=args.qmax, seed=args.seed,
                    cache_dir=args.cache_dir, use_cache=not args.no_cache)
    cfg.p = getattr(args, "p", None)
    cfg.n = getattr(args, "n", 1)
    cfg.k = getattr(args, "k", None)
    cfg.r = getattr(args, "r", 1)
    cfg.n_max = getattr(args, "nmax", 2)
    cfg.p_max = getattr(args, "pmax", None)
    cfg.p_min = getattr(args, "pmin", 3)
    cfg.output = getattr(args, "format", "text")
    if cmd == "theta":
        cfg.n_max = max(1, min(cfg.n, cfg.n_max))
        if cfg.n > 4:
            raise ConfigError(f"level n={cfg.n} exceeds 4")
    if cmd == "verify-bounds":
        if args.count < 0 or args.max_den < 1:
            raise ConfigError("--count must be >= 0 and --max-den >= 1")
    return cfg.validate()


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
    except (ConfigError, CurveError) as exc:
        print(f"mubound: config error: {exc}", file=sys.stderr)
        return 2
    session = Session(cfg)
    buf = io.StringIO()
    try:
        status = COMMANDS[args.command](cfg, args, buf, session)
    except ConfigError as exc:
        print(f"mubound: config error: {exc}", file=sys.stderr)
        return 2
    except (InvariantFailure, CoherenceError, AssertionError) as exc:
        sys.stdout.write(buf.getvalue())
        print(f"mubound: invariant violated: {exc}", file=sys.stderr)
        return 1
    except CurveError as exc:
        print(f"mubound: config error: {exc}", file=sys.stderr)
        return 2
    except (PadicError, PeriodError) as exc:
        print(f"mubound: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    finally:
        session.close()
    text = buf.getvalue()
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
