"""Command-line entry point ``zakharov-lab``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import __version__

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors already; keep the usage text on stderr."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load_config(path: str, output: str | None):
    from .config import parse_config

    with open(path) as fh:
        cfg = parse_config(fh.read())
    if output is not None:
        cfg = cfg.with_value("output.dir", output)
    return cfg


def _cmd_run(args) -> int:
    from .runner import run_scenario

    art = run_scenario(_load_config(args.config, args.output))
    s = art.summary
    print(f"verdict {s['classification']['verdict']}  K(0) {s['classification']['k0']:.6g}")
    for name, ok in s["audits"].items():
        print(f"audit {name}: {'pass' if ok else 'FAIL'}")
    print(f"wrote {art.directory}")
    return EXIT_OK if art.ok else EXIT_FAIL


def _parse_values(text: str) -> list:
    return [v.strip() for v in text.split(",") if v.strip()]


def _cmd_sweep(args) -> int:
    from .runner import sweep

    cfg = _load_config(args.config, args.output)
    rows = sweep(cfg, args.param, _parse_values(args.values), workers=args.workers)
    print(f"{'value':>10} {'verdict':>20} {'K(0)':>12} ok")
    for row in rows:
        k0 = "-" if row["k0"] is None else f"{row['k0']:.5g}"
        print(f"{row['value']:>10} {str(row['verdict']):>20} {k0:>12} {row['ok']}"
              + (f"  {row['error']}" if row["error"] else ""))
    return EXIT_OK if all(r["ok"] for r in rows) else EXIT_FAIL


def _cmd_ground_state(args) -> int:
    from .grid import make_grid
    from .ground_state import pohozaev_ratios, solve_ground_state

    gs = solve_ground_state(make_grid(args.n, args.rmax))
    p_grad, p_mass = pohozaev_ratios(gs)
    print(f"Q(0)       {gs.q0:.15f}")
    print(f"M(Q)       {gs.mass:.15f}")
    print(f"E_S(Q)     {gs.e_s:.15f}")
    print(f"J(Q)       {gs.j:.15f}")
    print(f"threshold  {gs.threshold:.15f}")
    print(f"pohozaev   grad {p_grad:.12f}  mass {p_mass:.12f}")
    return EXIT_OK if max(abs(p_grad - 1), abs(p_mass - 1)) < 1e-6 else EXIT_FAIL


def _cmd_audit_virial(args) -> int:
    from .runner import run_scenario

    cfg = _load_config(args.config, args.output)
    audits = tuple(dict.fromkeys(cfg.audits + ("virial", "monotonicity")))
    cfg = cfg.with_value("audits", ",".join(audits))
    art = run_scenario(cfg)
    for name in ("virial", "monotonicity"):
        print(f"audit {name}: {'pass' if art.summary['audits'][name] else 'FAIL'}")
    return EXIT_OK if art.summary["audits"]["virial"] and art.summary["audits"]["monotonicity"] \
        else EXIT_FAIL


def _cmd_audit_lemma24(args) -> int:
    from .grid import make_grid
    from .ground_state import solve_ground_state
    from .variational import lemma24_audit

    gs = solve_ground_state(make_grid(args.n, args.rmax))
    rep = lemma24_audit(gs.j, samples=args.samples, seed=args.seed)
    print(json.dumps({k: v for k, v in rep.items() if k != "violations"}, indent=2))
    print(f"violations {len(rep['violations'])}")
    return EXIT_OK if not rep["violations"] else EXIT_FAIL


def _cmd_audit_normalform(args) -> int:
    from .normal_form import default_beta, resonance_ok, resonance_scan

    beta = default_beta(args.alpha) if args.beta is None else args.beta
    scan = resonance_scan(beta, args.alpha, samples=args.samples)
    print(json.dumps(scan, indent=2))
    ok = resonance_ok(scan)
    print(f"resonance bounds: {'pass' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="zakharov-lab", description="Radial Zakharov threshold experiments.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run one scenario")
    run.add_argument("config")
    run.add_argument("--output")
    run.set_defaults(func=_cmd_run)

    sw = sub.add_parser("sweep", help="run a scenario for several values of one key")
    sw.add_argument("config")
    sw.add_argument("--param", required=True)
    sw.add_argument("--values", required=True, help="comma-separated")
    sw.add_argument("--workers", type=int, default=1)
    sw.add_argument("--output")
    sw.set_defaults(func=_cmd_sweep)

    gs = sub.add_parser("ground-state", help="print the threshold constants")
    gs.add_argument("--n", type=int, default=2047)
    gs.add_argument("--rmax", type=float, default=48.0)
    gs.set_defaults(func=_cmd_ground_state)

    av = sub.add_parser("audit-virial", help="run with the virial audits enabled")
    av.add_argument("config")
    av.add_argument("--output")
    av.set_defaults(func=_cmd_audit_virial)

    al = sub.add_parser("audit-lemma24", help="random search on the K-sign inequalities")
    al.add_argument("--samples", type=int, default=10_000)
    al.add_argument("--seed", type=int, default=0)
    al.add_argument("--n", type=int, default=1023)
    al.add_argument("--rmax", type=float, default=32.0)
    al.set_defaults(func=_cmd_audit_lemma24)

    an = sub.add_parser("audit-normalform", help="resonance scan of the normal-form regions")
    an.add_argument("--alpha", type=float, default=1.0)
    an.add_argument("--beta", type=float)
    an.add_argument("--samples", type=int, default=24)
    an.set_defaults(func=_cmd_audit_normalform)

    ver = sub.add_parser("version", help="print the package version")
    ver.set_defaults(func=lambda args: print(__version__) or EXIT_OK)
    return p


def main(argv=None) -> int:
    from .config import ConfigError

    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
