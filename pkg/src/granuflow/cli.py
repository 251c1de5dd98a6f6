"""Command-line interface: experiment orchestration and trace emission.

Subcommands: riemann, simulate, balance, compare, functionals, verify,
calibrate.  Exit codes: 0 success, 1 audit failure, 2 input error.

Profile files are JSON objects {"far_left": [h, p], "jumps": [[x, h, p], ...]}
where each jump holds the state to the right of x.  Every CSV gets a JSON
sidecar carrying the resolved configuration and a version string; floats are
written with 17 significant digits so traces replay bit-faithfully.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

from . import __version__, functionals, verify
from .fronttrack import TrackedSolution
from .model import DomainBox, State
from .profiles import Profile
from .riemann import solve_riemann
from .splitting import run_balance_law

F = "{:.17g}".format


class InputError(Exception):
    pass


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("GRANUFLOW_THREADS", "1")))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# profile and config I/O
# ---------------------------------------------------------------------------

def load_profile(path, box=None) -> Profile:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read profile {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise InputError(f"profile {path} is not valid JSON: line {exc.lineno}: {exc.msg}")
    try:
        far = State(*map(float, data["far_left"]))
        jumps = [(float(x), State(float(h), float(p))) for x, h, p in data.get("jumps", [])]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"profile {path}: bad schema ({exc})")
    prof = Profile.from_jumps(far, jumps)
    try:
        prof.validate(box)
    except ValueError as exc:
        raise InputError(f"profile {path}: {exc}")
    return prof


def save_profile(prof: Profile, path):
    data = {"far_left": [prof.far_left.h, prof.far_left.p],
            "jumps": [[float(x), s.h, s.p] for x, s in zip(prof.xs, prof.states[1:])]}
    with open(path, "w") as fh:
        json.dump(data, fh, indent=1)
        fh.write("\n")


def _write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(F(v) if isinstance(v, float) else str(v) for v in row) + "\n")


def _sidecar(path, cfg):
    meta = dict(cfg)
    meta["version"] = f"granuflow-{__version__}"
    with open(path, "w") as fh:
        json.dump(meta, fh, indent=1, sort_keys=True, default=str)
        fh.write("\n")


def _load_kappas(spec_str, box, m_star, seed):
    if spec_str == "calibrate":
        cert = functionals.calibrate_kappas(box, m_star=m_star, seed=seed)
        if not cert.all_green:
            print(cert.pretty(), file=sys.stderr)
            raise InputError("calibration failed: no admissible kappas")
        return cert.kappas, cert
    try:
        with open(spec_str) as fh:
            data = json.load(fh)
        return functionals.Kappas(**data).validate(), None
    except OSError as exc:
        raise InputError(f"cannot read kappas {spec_str}: {exc}")
    except (TypeError, ValueError, json.JSONDecodeError) as exc:
        raise InputError(f"bad kappas file {spec_str}: {exc}")


def _emit_run(outdir, ts, snapshots, cfg, kappas):
    outdir = Path(outdir)
    (outdir / "snapshots").mkdir(parents=True, exist_ok=True)
    _sidecar(outdir / "config.json", cfg)
    _write_csv(outdir / "interactions.csv",
               ["t", "x", "fam_in_1", "rho_in_1", "fam_in_2", "rho_in_2",
                "fams_out", "rho_out_h", "rho_out_p", "V", "Q", "G"],
               [(r.time, r.x,
                 r.incoming[0][0], r.incoming[0][2], r.incoming[1][0], r.incoming[1][2],
                 "+".join(str(w[0]) for w in r.outgoing),
                 next((w[2] for w in r.outgoing if w[0] == 1), 0.0),
                 next((w[2] for w in r.outgoing if w[0] == 2), 0.0),
                 r.V_post, r.Q_post, r.G_post)
                for r in ts.event_log])
    _write_csv(outdir / "fronts.csv",
               ["family", "kind", "t0", "x0", "t1", "x1", "speed", "gamma", "rho"],
               [(s.family, s.kind, s.t0, s.x0,
                 s.t1 if s.t1 is not None else ts.time,
                 s.x_at(s.t1 if s.t1 is not None else ts.time),
                 s.speed, s.gamma, s.rho) for s in ts.segments])
    rows = []
    for t in snapshots:
        prof, cat = ts.snapshot(t, "post")
        v = functionals.total_strength(cat)[0]
        q = functionals.interaction_potential(cat, kappas)[3]
        rows.append((t, v, q, v + q))
        _write_csv(outdir / "snapshots" / f"snap_t={F(t)}.csv", ["x", "h", "p"],
                   [(float(x), s.h, s.p) for x, s in zip(prof.xs, prof.states[1:])])
        save_profile(prof, outdir / "snapshots" / f"snap_t={F(t)}.json")
        meta = dict(cfg)
        meta["far_left"] = [prof.far_left.h, prof.far_left.p]
        meta["t"] = t
        _sidecar(outdir / "snapshots" / f"meta_t={F(t)}.json", meta)
    _write_csv(outdir / "functionals.csv", ["t", "V", "Q", "G"], rows)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_riemann(args):
    box = _box(args)
    left = State(args.left[0], args.left[1])
    right = State(args.right[0], args.right[1])
    fan = solve_riemann(left, right, eps=args.eps if args.partition else None)
    out = {
        "left": list(left), "right": list(right), "middle": list(fan.middle),
        "waves": [dict(family=w.family, kind=w.kind, gamma=w.gamma, rho=w.rho,
                       speed=w.speed, left=list(w.left), right=list(w.right))
                  for w in fan.waves],
        "compose_residual": fan.compose_residual(),
    }
    print(json.dumps(out, indent=1, default=float))
    return 0


def _cmd_simulate(args):
    box = _box(args)
    prof = load_profile(args.profile, box)
    kappas, _ = _load_kappas(args.kappas, box, args.m_star, args.seed) \
        if args.kappas else (functionals.Kappas(), None)
    ts = TrackedSolution(prof, args.eps, box=box, omega_delta=kappas.delta_bar)
    snaps = sorted(set(args.snapshots + [0.0, args.horizon]))
    ts.evolve(args.horizon)
    bad = [r for r in ts.event_log if r.delta_G > 1e-12]
    _emit_run(args.out, ts, snaps, _cfg(args), kappas)
    print(f"events={ts.events_processed} fronts={len(ts.fronts)} "
          f"maxTV={ts.max_tv_seen:.4g} G_monotone={'yes' if not bad else 'NO'}")
    return 0 if not bad else 1


def _cmd_balance(args):
    box = _box(args)
    prof = load_profile(args.profile, box)
    kappas, _ = _load_kappas(args.kappas, box, args.m_star, args.seed) \
        if args.kappas else (functionals.Kappas(), None)
    snaps = sorted(set(args.snapshots + [0.0, args.horizon]))
    run = run_balance_law(prof, args.eps, args.dt, args.horizon, box=box,
                          omega_delta=kappas.delta_bar, snapshot_times=snaps)
    _emit_run(args.out, run.ts, snaps, _cfg(args), kappas)
    _write_csv(Path(args.out) / "steps.csv",
               ["k", "t", "G_pre", "G_post", "V_pre", "V_post"],
               [(r.k, r.t, r.G_pre, r.G_post, r.V_pre, r.V_post) for r in run.step_log])
    for r in run.step_log:
        for side in ("pre", "post"):
            prof, _ = run.ts.snapshot(r.t, side)
            save_profile(prof, Path(args.out) / "snapshots" / f"step{r.k}_{side}.json")
    growth = max(((r.G_post / r.G_pre - 1.0) / args.dt if r.G_pre > 1e-14 else 0.0)
                 for r in run.step_log) if run.step_log else 0.0
    bad = [r for r in run.ts.event_log if r.delta_G > 1e-12]
    print(f"steps={len(run.step_log)} events={run.ts.events_processed} "
          f"step_growth_C={growth:.4g} G_monotone={'yes' if not bad else 'NO'}")
    return 0 if not bad else 1


def _cmd_compare(args):
    box = _box(args)
    kappas, cert = _load_kappas(args.kappas or "calibrate", box, args.m_star, args.seed)
    cfg = verify.StabilityConfig(box=box, eps_ladder=(args.eps,),
                                 dt=args.dt if args.dt > 0 else None,
                                 T=args.horizon, seed=args.seed, kappas=kappas,
                                 snapshot_times=tuple(args.snapshots) or (args.horizon,))
    u0 = load_profile(args.profile, box)
    v0 = load_profile(args.profile_v, box)
    ts_u, ts_v, steps, _ = verify._run_pair(u0, v0, args.eps, cfg.dt, args.horizon,
                                            box, omega_delta=kappas.delta_bar)
    res = verify._audit_pair(ts_u, ts_v, cfg, kappas, args.eps, steps, None)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    _sidecar(outdir / "config.json", _cfg(args))
    times = sorted(set(list(cfg.snapshot_times) + [0.0]))
    rows = []
    for t in times:
        rep = verify._phi_at(ts_u, ts_v, t, kappas)
        rows.append((t, rep.V_u, rep.Q_u, rep.G_u, rep.V_v, rep.Q_v, rep.G_v, rep.phi))
    _write_csv(outdir / "phi_series.csv",
               ["t", "V_u", "Q_u", "G_u", "V_v", "Q_v", "G_v", "Phi"], rows)
    ok = res["phi_monotone"] and res["compounded_ok"] and res["sandwich_ok"]
    print(f"phi_monotone={res['phi_monotone']} C1={res['C1']:.4g} C2={res['C2']:.4g} "
          f"C0={res['C0']:.4g} W*={res['W_star']:.4g} audit={'PASS' if ok else 'FAIL'}")
    return 0 if ok else 1


def _cmd_functionals(args):
    box = _box(args)
    kappas, _ = _load_kappas(args.kappas, box, args.m_star, args.seed) \
        if args.kappas else (functionals.Kappas(), None)
    z = load_profile(args.z, None) if args.z else None
    dir_u, dir_v = Path(args.u_series), Path(args.v_series)
    rows = []
    for fu in sorted(dir_u.glob("snap_t=*.json")):
        t = float(fu.stem.split("=", 1)[1])
        fv = dir_v / fu.name
        if not fv.exists():
            raise InputError(f"missing matching snapshot {fv}")
        pu = load_profile(fu)
        pv = load_profile(fv)
        cu = functionals.catalog_of_profile(pu, eps=args.eps)
        cv = functionals.catalog_of_profile(pv, eps=args.eps)
        rep = functionals.phi(cu, cv, pu, pv, z, kappas)
        rows.append((t, rep.V_u, rep.Q_u, rep.G_u, rep.V_v, rep.Q_v, rep.G_v, rep.phi))
    rows.sort()
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    _write_csv(outdir / "functionals_series.csv",
               ["t", "V_u", "Q_u", "G_u", "V_v", "Q_v", "G_v", "Phi"], rows)
    _sidecar(outdir / "config.json", _cfg(args))
    print(f"wrote {len(rows)} rows")
    return 0


_SUITES = ("interactions", "timestep", "appendixB", "appendixC", "stability",
           "semigroup")


def _run_suite(name, box, args):
    if name == "interactions":
        return verify.check_interaction_estimates(box, args.samples, seed=args.seed)
    if name == "timestep":
        return verify.check_timestep_estimates(box, n=max(args.samples // 5, 200),
                                               seed=args.seed)
    if name == "appendixB":
        return [verify.check_appendixB(box, n=args.samples, seed=args.seed)]
    if name == "appendixC":
        return (verify.check_appendixC(box, n=max(args.samples // 2, 500), seed=args.seed)
                + [verify.check_vanishing_lemma(500, seed=args.seed, box=box)])
    if name == "stability":
        # homogeneous pair at desk scale; the split-scheme pair audit is the
        # `compare` subcommand with --dt (a small dt means many source steps)
        cfg = verify.StabilityConfig(box=box, seed=args.seed, dt=None,
                                     T=min(args.horizon, 1.0), n_jumps=4,
                                     tv_scale=0.3,
                                     eps_ladder=(args.eps, args.eps / 2))
        return [verify.check_stability_run(cfg)]
    if name == "semigroup":
        return verify.check_semigroup_defect(box, seed=args.seed)
    raise InputError(f"unknown suite {name}")


def _cmd_verify(args):
    box = _box(args)
    names = list(_SUITES) if args.suite == "all" else [args.suite]
    results = {}
    workers = min(worker_count(), len(names))
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            futs = {n: pool.submit(_run_suite, n, box, args) for n in names}
            for n in names:
                results[n] = futs[n].result()
    else:
        for n in names:
            results[n] = _run_suite(n, box, args)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    _sidecar(outdir / "config.json", _cfg(args))
    all_ok = True
    rows = []
    blob = {}
    for n in names:
        for rep in results[n]:
            print(rep.summary())
            all_ok &= rep.passed
            rows.append((rep.estimate_id, rep.n_samples, rep.sup_ratio, rep.slope,
                         rep.r2, int(rep.passed)))
            blob[rep.estimate_id] = dataclasses.asdict(rep)
    _write_csv(outdir / "verify.csv",
               ["estimate", "n", "sup_ratio", "slope", "r2", "passed"], rows)
    with open(outdir / "verify.json", "w") as fh:
        json.dump(blob, fh, indent=1, default=str)
        fh.write("\n")
    return 0 if all_ok else 1


def _cmd_calibrate(args):
    box = _box(args)
    cert = functionals.calibrate_kappas(box, n_samples=args.samples,
                                        m_star=args.m_star, seed=args.seed)
    print(cert.pretty())
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    with open(outdir / "kappas.json", "w") as fh:
        json.dump(dataclasses.asdict(cert.kappas), fh, indent=1)
        fh.write("\n")
    with open(outdir / "certificate.json", "w") as fh:
        json.dump(dict(all_green=cert.all_green, fitted=cert.fitted,
                       conditions=[dict(name=c[0], lhs=c[1], rhs=c[2],
                                        margin=c[3], ok=c[4]) for c in cert.conditions]),
                  fh, indent=1, default=float)
        fh.write("\n")
    _sidecar(outdir / "config.json", _cfg(args))
    return 0 if cert.all_green else 1


# ---------------------------------------------------------------------------
# argument plumbing
# ---------------------------------------------------------------------------

def _box(args):
    try:
        d0, dp = args.box
        return DomainBox(d0, dp)
    except ValueError as exc:
        raise InputError(str(exc))


def _cfg(args):
    skip = {"func"}
    return {k: v for k, v in vars(args).items() if k not in skip}


def _common(sp, out_required=True):
    sp.add_argument("--eps", type=float, default=1e-3)
    sp.add_argument("--dt", type=float, default=0.01)
    sp.add_argument("--horizon", type=float, default=1.0)
    sp.add_argument("--box", type=float, nargs=2, default=(0.05, 0.1),
                    metavar=("DELTA0", "DELTA_P"))
    sp.add_argument("--kappas", type=str, default=None,
                    help="path to kappas JSON, or 'calibrate'")
    sp.add_argument("--m-star", type=float, default=0.15)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", type=str, required=out_required, default=None)
    sp.add_argument("--snapshots", type=lambda s: [float(v) for v in s.split(",") if v],
                    default=[])


def build_parser():
    ap = argparse.ArgumentParser(prog="granuflow", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("riemann", help="solve one Riemann problem, print the fan")
    sp.add_argument("--left", type=float, nargs=2, required=True, metavar=("H", "P"))
    sp.add_argument("--right", type=float, nargs=2, required=True, metavar=("H", "P"))
    sp.add_argument("--partition", action="store_true",
                    help="use the eps-chained rarefaction branches")
    _common(sp, out_required=False)
    sp.set_defaults(func=_cmd_riemann)

    sp = sub.add_parser("simulate", help="homogeneous front tracking run")
    sp.add_argument("profile")
    _common(sp)
    sp.set_defaults(func=_cmd_simulate)

    sp = sub.add_parser("balance", help="split-scheme run of the balance law")
    sp.add_argument("profile")
    _common(sp)
    sp.set_defaults(func=_cmd_balance)

    sp = sub.add_parser("compare", help="two-solution Lyapunov audit")
    sp.add_argument("profile")
    sp.add_argument("profile_v")
    _common(sp)
    sp.set_defaults(func=_cmd_compare)

    sp = sub.add_parser("functionals", help="functional series from snapshot dirs")
    sp.add_argument("--u-series", required=True)
    sp.add_argument("--v-series", required=True)
    sp.add_argument("--z", type=str, default=None)
    _common(sp)
    sp.set_defaults(func=_cmd_functionals)

    sp = sub.add_parser("verify", help="estimate verification suites")
    sp.add_argument("--suite", choices=_SUITES + ("all",), default="all")
    sp.add_argument("--samples", type=int, default=20000)
    _common(sp)
    sp.set_defaults(func=_cmd_verify)

    sp = sub.add_parser("calibrate", help="fit the weight exponents (Conditions Sigma)")
    sp.add_argument("--samples", type=int, default=4000)
    _common(sp)
    sp.set_defaults(func=_cmd_calibrate)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
