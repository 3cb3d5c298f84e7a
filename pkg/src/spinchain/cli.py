"""Command-line front end: ``spinchain <command> --rep 2,1,0 ...``.

Every run prints one JSON document (or CSV table) carrying a manifest with the
command, all inputs, the library version and a timestamp.  Exit status is 0 on
success, 1 when a verification residual exceeds the tolerance and 2 on bad input.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import os
import sys
from typing import Any, Callable

import numpy as np
from threadpoolctl import threadpool_limits

from . import __version__
from .bethe import BetheError, closure, joint_eigenbasis
from .gtbasis import HighestWeight, casimir_matrix, enumerate_patterns, gen
from .hambuilder import (
    NotRectangularError,
    check_rectangular,
    density_blocks,
    hamiltonian_total_matrix,
    invariance_residual,
    log_derivative_residual,
    permutation_residual,
    r_lambda_lambda_matrix,
    swap_symmetry_residual,
    tpg_crosscheck,
    unitarity_residual,
    ybe_residual,
)
from .laxfactory import POLYNOMIAL, RAW, PoleError, r_I, rll_residual, verify_block_equations
from .qfactory import QFamily, commutation_report, det_formula_report, q_operator_matrix, qq_report
from .weights import ShiftedWeightError, complement, index_set, shifted_weights, verify_cayley_hamilton, x_basis

DEFAULT_TOL = 1e-8
THREADS_ENV = "SPINCHAIN_THREADS"


class InputError(ValueError):
    pass


# ---------------------------------------------------------------- parsing


def parse_rep(text: str) -> HighestWeight:
    try:
        return HighestWeight.parse(text)
    except ValueError as exc:
        raise InputError(f"malformed weight {text!r}: {exc}") from None


def parse_ints(text: str | None) -> tuple[int, ...]:
    if text is None or text.strip() in ("", "-", "{}"):
        return ()
    try:
        return tuple(int(t) for t in text.strip("{}").split(",") if t.strip())
    except ValueError:
        raise InputError(f"expected comma-separated integers, got {text!r}") from None


def parse_complex(text: str) -> complex:
    t = text.strip().replace(" ", "").replace("i", "j")
    try:
        return complex(t)
    except ValueError:
        raise InputError(f"malformed complex number {text!r}") from None


def parse_complex_list(text: str | None) -> list[complex]:
    if text is None:
        return []
    return [parse_complex(t) for t in text.split(",") if t.strip()]


def encode(x: Any) -> Any:
    """JSON-ready form: complex -> [re, im], arrays -> nested lists."""
    if isinstance(x, np.ndarray):
        return [encode(v) for v in x.tolist()] if x.ndim else encode(x.item())
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, dict):
        return {str(k): encode(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [encode(v) for v in x]
    return x


def _cell(v: Any) -> Any:
    if isinstance(v, (complex, np.complexfloating)):
        sign = "-" if v.imag < 0 else "+"
        return f"{float(v.real)!r}{sign}{abs(float(v.imag))!r}j"
    if isinstance(v, (list, tuple, dict, np.ndarray)):
        return json.dumps(encode(v))
    return v


# ---------------------------------------------------------------- context


class Context:
    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.hw = parse_rep(args.rep)
        if args.n is not None and args.n != self.hw.n:
            raise InputError(f"--n {args.n} does not match the {self.hw.n} entries of --rep")
        self.tol = args.tolerance

    def twist(self) -> tuple[complex, ...]:
        tw = parse_complex_list(getattr(self.args, "twist", None))
        if not tw:
            raise InputError("--twist is required for this command")
        if len(tw) != self.hw.n:
            raise InputError(f"--twist needs {self.hw.n} angles, got {len(tw)}")
        return tuple(tw)

    def zs(self, name: str = "z", default: list[complex] | None = None) -> list[complex]:
        zs = parse_complex_list(getattr(self.args, name, None))
        if not zs:
            if default is None:
                raise InputError(f"--{name.replace('_', '-')} is required for this command")
            return default
        return zs

    def set_(self, name: str = "set") -> tuple[int, ...]:
        try:
            return index_set(parse_ints(getattr(self.args, name, None)), self.hw.n)
        except ValueError as exc:
            raise InputError(str(exc)) from None

    def length(self) -> int:
        L = self.args.length
        if L is None or L < 1:
            raise InputError("--length must be a positive integer")
        return L


def _matrix_rows(m: np.ndarray, **extra) -> list[dict]:
    rows = []
    for (i, j), v in np.ndenumerate(m):
        if v != 0:
            rows.append({**extra, "row": i, "col": j, "re": float(v.real), "im": float(v.imag)})
    return rows


def _residual_rows(checks: list[dict]) -> list[dict]:
    return [{k: _cell(v) for k, v in c.items()} for c in checks]


def _judge(checks: list[dict], tol: float) -> bool:
    ok = True
    for c in checks:
        c["pass"] = bool(c["residual"] <= c.get("tolerance", tol))
        ok &= c["pass"]
    return ok


# ---------------------------------------------------------------- commands


def cmd_patterns(ctx: Context):
    pats = enumerate_patterns(ctx.hw)
    result = {"dimension": len(pats), "patterns": [[list(r) for r in p] for p in pats]}
    rows = [{"index": i, "pattern": json.dumps([list(r) for r in p])} for i, p in enumerate(pats)]
    return result, rows, True


def cmd_weights(ctx: Context):
    I = ctx.set_()
    S = complement(I, ctx.hw.n)
    if not S:
        raise InputError("complement of --set is empty")
    table = shifted_weights(S, ctx.hw)
    blocks = [{"values": list(b.values), "multiplicity": b.multiplicity} for b in table.blocks]
    result = {"set": list(I), "subalgebra": list(S), "blocks": blocks}
    rows = [{"values": json.dumps(b["values"]), "multiplicity": b["multiplicity"]} for b in blocks]
    return result, rows, True


def cmd_lax(ctx: Context):
    I = ctx.set_()
    z = ctx.zs()[0]
    norm = ctx.args.normalization
    op = r_I(z, I, ctx.hw, norm)
    terms = [{"abar": list(al), "a": list(be), "matrix": m} for (al, be), m in sorted(op.terms.items())]
    result = {"set": list(I), "z": z, "normalization": norm, "modes": [list(m) for m in op.modes], "terms": terms}
    rows = []
    for t in terms:
        rows.extend(_matrix_rows(t["matrix"], abar=json.dumps(t["abar"]), a=json.dumps(t["a"])))
    return result, rows, True


def cmd_qop(ctx: Context):
    I = ctx.set_()
    z = ctx.zs()[0]
    m = q_operator_matrix(z, I, ctx.hw, ctx.length(), ctx.twist(), ctx.args.normalization)
    result = {"set": list(I), "z": z, "length": ctx.length(), "matrix": m}
    return result, _matrix_rows(m), True


def _verify_checks(ctx: Context) -> list[dict]:
    check = ctx.args.check
    hw = ctx.hw
    rng = np.random.default_rng(ctx.args.seed)
    default_z = [complex(x, y) for x, y in rng.uniform(-1, 1, size=(3, 2))]
    checks: list[dict] = []

    def add(name, absolute, relative=None, **info):
        rel = absolute if relative is None else relative
        checks.append({"check": name, **info, "absolute": absolute, "relative": rel, "residual": rel})

    if check in ("qq", "comm", "det"):
        fam = QFamily(hw, ctx.length(), ctx.twist(), ctx.args.normalization)
        I = ctx.set_()
        for z in ctx.zs(default=default_z):
            if check == "qq":
                pair = parse_ints(ctx.args.pair)
                if len(pair) != 2:
                    raise InputError("--pair needs two indices a,b")
                try:
                    r = qq_report(I, pair[0], pair[1], z, hw, fam.L, fam.twist, fam)
                except ValueError as exc:
                    raise InputError(str(exc)) from None
                add("qq", r.absolute, r.relative, set=list(I), pair=list(pair), z=z)
            elif check == "comm":
                J = ctx.set_("set2") if ctx.args.set2 is not None else I
                z2 = ctx.zs("z2", default=[z + 0.37 - 0.21j])[0]
                r = commutation_report(I, J, z, z2, hw, fam.L, fam.twist, fam)
                add("comm", r.absolute, r.relative, set=list(I), set2=list(J), z=z, z2=z2)
            else:
                try:
                    r = det_formula_report(I, z, hw, fam.L, fam.twist, fam)
                except ValueError as exc:
                    raise InputError(str(exc)) from None
                add("det", r.absolute, r.relative, set=list(I), z=z)
    elif check == "ch":
        I = ctx.set_()
        if not complement(I, hw.n):
            raise InputError("complement of --set is empty")
        add("cayley_hamilton", verify_cayley_hamilton(I, hw), set=list(I))
    elif check == "xbasis":
        I = ctx.set_()
        if not complement(I, hw.n):
            raise InputError("complement of --set is empty")
        xb = x_basis(I, hw)
        add("x_basis", xb.residual, set=list(I), jofx=xb.jofx_residual, exchange=xb.exchange_residual, c2=xb.c2_residual)
    elif check == "blocks":
        I = ctx.set_()
        for z in ctx.zs(default=default_z):
            res = verify_block_equations(z, I, hw, ctx.args.normalization)
            add("block_equations", max(res), set=list(I), z=z, parts=list(res))
    elif check == "casimir":
        I = ctx.set_() or tuple(range(1, hw.n + 1))
        worst = 0.0
        for k in range(1, len(I) + 1):
            C = casimir_matrix(k, I, hw)
            for a in I:
                for b in I:
                    g = gen(a, b, hw)
                    worst = max(worst, float(np.abs(C @ g - g @ C).max()))
        add("casimir_centrality", worst, set=list(I))
    elif check == "rll":
        for z in ctx.zs(default=default_z):
            z2 = ctx.zs("z2", default=[z - 0.63 + 0.4j])[0]
            add("rll", rll_residual(z, z2, hw), z=z, z2=z2)
    elif check == "rmat":
        check_rectangular(hw)
        add("permutation_point", permutation_residual(hw))
        add("log_derivative", log_derivative_residual(hw), tolerance=1e-6)
        for z in ctx.zs(default=default_z):
            add("unitarity", unitarity_residual(z, hw), z=z)
            add("invariance", invariance_residual(z, hw), z=z)
            add("swap_symmetry", swap_symmetry_residual(z, hw), z=z)
            add("ybe", ybe_residual(z, z * 0.5 - 0.3 + 0.7j, hw), z=z)
            add("tpg", tpg_crosscheck(z, hw), z=z)
    else:  # pragma: no cover - argparse restricts choices
        raise InputError(f"unknown check {check!r}")
    return checks


def cmd_verify(ctx: Context):
    checks = _verify_checks(ctx)
    ok = _judge(checks, ctx.tol)
    result = {"check": ctx.args.check, "tolerance": ctx.tol, "passed": ok, "results": checks}
    return result, _residual_rows(checks), ok


def cmd_ham(ctx: Context):
    shape = check_rectangular(ctx.hw)
    blocks = density_blocks(ctx.hw)
    result: dict = {"shape": {"a": shape.a, "s": shape.s, "alpha": shape.alpha, "beta": shape.beta},
                    "density_blocks": [{**b, "highest": list(b["highest"]), "A": list(b["A"])} for b in blocks]}
    rows = [{"highest": json.dumps(list(b["highest"])), "A": json.dumps(list(b["A"])), "dim": b["dim"],
             "density": b["density"]} for b in blocks]
    if ctx.args.spectrum:
        H = hamiltonian_total_matrix(ctx.hw, ctx.length(), ctx.twist())
        ev = _sorted_eigs(H)
        result["length"] = ctx.length()
        result["spectrum"] = ev
        rows = [{"index": i, "re": float(e.real), "im": float(e.imag)} for i, e in enumerate(ev)]
    return result, rows, True


def _sorted_eigs(m: np.ndarray) -> np.ndarray:
    ev = np.linalg.eigvals(m)
    ev = np.where(np.abs(ev.imag) < 1e-12 * max(1.0, np.abs(ev).max()), ev.real + 0j, ev)
    return ev[np.lexsort((ev.imag, np.round(ev.real, 12)))]


def cmd_rmat(ctx: Context):
    z = ctx.zs()[0]
    m = r_lambda_lambda_matrix(z, ctx.hw)
    return {"z": z, "dimension": m.shape[0], "matrix": m}, _matrix_rows(m), True


def cmd_spectrum(ctx: Context):
    L = ctx.length()
    tw = ctx.twist()
    if ctx.args.operator == "H":
        m = hamiltonian_total_matrix(ctx.hw, L, tw)
        info = {"operator": "H"}
    else:
        I = ctx.set_()
        z = ctx.zs()[0]
        m = q_operator_matrix(z, I, ctx.hw, L, tw, ctx.args.normalization)
        info = {"operator": "Q", "set": list(I), "z": z}
    ev = _sorted_eigs(m)
    result = {**info, "length": L, "eigenvalues": ev}
    return result, [{"index": i, "re": float(e.real), "im": float(e.imag)} for i, e in enumerate(ev)], True


def cmd_bethe(ctx: Context):
    L = ctx.length()
    tw = ctx.twist()
    path = parse_ints(ctx.args.path) or tuple(range(1, ctx.hw.n + 1))
    try:
        fam = QFamily(ctx.hw, L, tw)
        states = joint_eigenbasis(ctx.hw, L, tw, fam)
        rep = closure(ctx.hw, L, tw, path, fam, states)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    for r in rep.rows:
        r["pass"] = bool(r["bethe_residual"] <= ctx.tol and r["energy_error"] <= ctx.tol
                         and r["magnons"] == r["expected_magnons"])
    ok = all(r["pass"] for r in rep.rows)
    result = {"path": list(rep.path), "tolerance": ctx.tol, "passed": ok,
              "max_bethe_residual": rep.max_bethe_residual, "max_energy_error": rep.max_energy_error,
              "states": rep.rows}
    rows = [{k: _cell(v) for k, v in r.items()} for r in rep.rows]
    return result, rows, ok


COMMANDS: dict[str, Callable] = {
    "patterns": cmd_patterns,
    "weights": cmd_weights,
    "lax": cmd_lax,
    "qop": cmd_qop,
    "verify": cmd_verify,
    "ham": cmd_ham,
    "rmat": cmd_rmat,
    "bethe": cmd_bethe,
    "spectrum": cmd_spectrum,
}

VERIFY_CHECKS = ("qq", "comm", "det", "ch", "xbasis", "blocks", "casimir", "rll", "rmat")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spinchain", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--rep", required=True, help="highest weight, e.g. 2,1,0")
    common.add_argument("--n", type=int, help="rank check: must equal the number of --rep entries")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", help="write to this path instead of stdout")
    common.add_argument("--tolerance", "--tol", type=float, default=DEFAULT_TOL)
    common.add_argument("--seed", type=int, default=0, help="seed for default spectral-parameter samples")

    def chain(p, z=True, twist=True):
        p.add_argument("--length", type=int)
        if twist:
            p.add_argument("--twist", help="phi_1,...,phi_n (complex allowed, e.g. 0.3-0.5j)")
        if z:
            p.add_argument("--z", help="spectral parameter(s), comma separated, a+bj or a+bi")
        p.add_argument("--set", help="index set I, e.g. 1,3 (empty: '-')")
        p.add_argument("--normalization", choices=(POLYNOMIAL, RAW), default=POLYNOMIAL)

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("patterns", parents=[common], help="Gelfand-Tsetlin patterns")
    p = sub.add_parser("weights", parents=[common], help="shifted weights of gl(complement of I)")
    p.add_argument("--set", help="index set I")
    p = sub.add_parser("lax", parents=[common], help="normal-ordered R_I(z)")
    chain(p, twist=False)
    p = sub.add_parser("qop", parents=[common], help="Q_I(z) matrix")
    chain(p)
    p = sub.add_parser("verify", parents=[common], help="residual checks")
    p.add_argument("check", choices=VERIFY_CHECKS)
    chain(p)
    p.add_argument("--pair", help="a,b for the QQ relation")
    p.add_argument("--set2", help="second index set for comm")
    p.add_argument("--z2", help="second spectral parameter")
    p = sub.add_parser("ham", parents=[common], help="Hamiltonian density blocks and spectrum")
    chain(p, z=False)
    p.add_argument("--spectrum", action="store_true")
    p = sub.add_parser("rmat", parents=[common], help="R(z) on V (x) V")
    p.add_argument("--z", required=True)
    p = sub.add_parser("bethe", parents=[common], help="Bethe roots, equations and energies per state")
    chain(p, z=False)
    p.add_argument("--path", help="permutation a_1,...,a_n defining the chain of sets")
    p = sub.add_parser("spectrum", parents=[common], help="eigenvalues of H or Q_I(z)")
    chain(p)
    p.add_argument("--operator", choices=("H", "Q"), default="H")
    return parser


def manifest(args: argparse.Namespace, argv: list[str], threads: int | None) -> dict:
    inputs = {k: v for k, v in sorted(vars(args).items()) if k not in ("command", "format", "out")}
    return {
        "command": args.command,
        "argv": argv,
        "inputs": inputs,
        "threads": threads,
        "version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
    }


def render(doc: dict, rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(encode(doc)) + "\n"
    buf = io.StringIO()
    buf.write("# manifest: " + json.dumps(encode(doc["manifest"])) + "\n")
    buf.write(f"# status: {doc['status']}\n")
    if rows:
        fields = list(dict.fromkeys(k for r in rows for k in r))
        writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        for r in rows:
            writer.writerow({k: _cell(v) for k, v in r.items()})
    return buf.getvalue()


def thread_limit() -> int | None:
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw.strip() == "":
        return None
    try:
        n = int(raw)
    except ValueError:
        raise InputError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise InputError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def run(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        threads = thread_limit()
        ctx = Context(args)
        with threadpool_limits(limits=threads):
            result, rows, ok = COMMANDS[args.command](ctx)
    except (InputError, NotRectangularError, ShiftedWeightError, PoleError, BetheError, IndexError, ValueError) as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return 2
    doc = {"manifest": manifest(args, argv, threads), "status": "ok" if ok else "fail", "result": result}
    text = render(doc, rows, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if ok else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
