"""Command-line front end.

Each subcommand reads its inputs, makes one library call and writes a JSON
object holding the result together with the resolved configuration. Output
is sorted-key JSON with no timestamps, so identical flags give identical
bytes.

Exit codes: 0 success, 1 malformed input, 2 contract violation,
3 resource guard exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .cartan import (
    AbelianMeasure,
    CartanGroupSpec,
    beta_weights,
    cartan_channel_twirl,
    kak_channel_twirl,
    sector_decomposition,
)
from .channels import ChoiOperator, check_cp_tp, choi_from_kraus, identity_channel, kraus_from_choi
from .commutant import twirl_channel_exact
from .designs import BUILTIN_NAMES, builtin_design, design_channel_twirl, verify_design
from .dual import dual_channel_twirl, kraus_sum
from .errors import ContractError, NotPSDError, ResourceGuardError, ShapeError, TwirlError
from .io import MalformedInput, decode_choi, decode_design, dumps, encode_choi, encode_matrix, read_json
from .montecarlo import mc_cartan_twirl, mc_channel_twirl
from .reps import CONJUGATE, PLAIN, Representation, choi_representation
from .schur import decompose
from .tensor import dimension_guard, factorial_guard, partial_trace

EXIT_OK, EXIT_MALFORMED, EXIT_CONTRACT, EXIT_GUARD = 0, 1, 2, 3


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="channel JSON (Kraus or Choi form); default: identity channel")
    common.add_argument("--output", help="write the result here instead of stdout")
    common.add_argument("--d", type=_positive_int, help="local dimension")
    common.add_argument("--t-in", type=_positive_int, help="number of input factors")
    common.add_argument("--t-out", type=_positive_int, help="number of output factors")
    common.add_argument("--tol", type=_positive_float, default=1e-10, help="numerical tolerance for reports")

    cartan = argparse.ArgumentParser(add_help=False)
    cartan.add_argument("--group", choices=("SL", "SU", "U"), default="SL")
    cartan.add_argument(
        "--measure",
        help="gaussian[:SIGMA[:CUTOFF[:NODES]]] | point | file:PATH (default: gaussian for SL, point otherwise)",
    )

    sampling = argparse.ArgumentParser(add_help=False)
    sampling.add_argument("--samples", type=_positive_int, default=100_000)
    sampling.add_argument("--seed", type=int, default=0)
    sampling.add_argument("--streams", type=_positive_int, default=1)

    design = argparse.ArgumentParser(add_help=False)
    design.add_argument("--design", required=True, help=f"builtin:NAME ({', '.join(BUILTIN_NAMES)}) or file:PATH")
    design.add_argument("--measure", help="Abelian measure for builtin:sl2c_product")

    parser = argparse.ArgumentParser(prog="choi-twirl", description="Group-averaged quantum channels via Choi operators.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("twirl", parents=[common], help="exact Haar twirl over U(d)")
    p.add_argument("--route", choices=("gamma", "direct"), default="gamma")

    p = sub.add_parser("mc-twirl", parents=[common, sampling], help="Monte-Carlo twirl estimate")
    p.add_argument("--group", choices=("U", "SL"), default="U")
    p.add_argument("--measure", help="Abelian measure when --group SL (default gaussian)")

    p = sub.add_parser("cartan-twirl", parents=[common, cartan], help="twirl over SL(d) or a compact degeneration")
    p.add_argument(
        "--route",
        choices=("direct", "gamma", "kak"),
        default="direct",
        help="direct/gamma: weighted sector formula; kak: exact K A K' integral",
    )

    sub.add_parser("dual-twirl", parents=[common, cartan], help="sector twirl as a mixture of unitary channels")
    sub.add_parser("design-twirl", parents=[common, design], help="twirl reconstructed from a weighted design")

    p = sub.add_parser("decompose", parents=[common], help="isotypic sectors of a collective representation")
    p.add_argument("--factors", help="factor pattern such as 'ppc' (p = U, c = conjugate U)")
    p.add_argument("--route", choices=("gamma", "direct"), default="direct", help="which Choi-space representation")

    p = sub.add_parser("verify-design", parents=[common, design], help="check a design against the exact twirl")
    p.add_argument("--t", type=_positive_int, help="order to verify at (default: the design's own order)")

    sub.add_parser("info", parents=[common], help="summary of a channel JSON")
    return parser


# ----------------------------------------------------------------------------- helpers


def _guard(d: int, t: int) -> None:
    factorial_guard(t)
    dimension_guard(d**t)


def _load_channel(args) -> ChoiOperator:
    if args.input is None:
        d = args.d or 2
        t_in = args.t_in or args.t_out or 1
        t_out = args.t_out or t_in
        if t_in != t_out:
            raise ContractError("the default identity channel needs t_in == t_out; pass --input for other shapes")
        _guard(d, t_in + t_out)
        return choi_from_kraus(identity_channel(d, t_in))
    data = read_json(args.input)
    if isinstance(data, dict):
        inner = data.get("choi", data)
        if isinstance(inner, dict) and all(k in inner for k in ("d", "t_in", "t_out")):
            try:
                _guard(int(inner["d"]), int(inner["t_in"]) + int(inner["t_out"]))
            except (TypeError, ValueError) as exc:
                raise MalformedInput(f"invalid dimensions: {exc}") from exc
    j = decode_choi(data)
    for flag, value, actual in (("--d", args.d, j.d), ("--t-in", args.t_in, j.t_in), ("--t-out", args.t_out, j.t_out)):
        if value is not None and value != actual:
            raise ContractError(f"{flag} {value} does not match the input channel ({flag[2:]}={actual})")
    return j


def _measure(text: str | None, d: int, group: str) -> AbelianMeasure:
    if text is None:
        text = "gaussian" if group == "SL" else "point"
    try:
        return AbelianMeasure.parse(text, d)
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise MalformedInput(f"cannot read measure {text!r}: {exc}") from exc
    except ValueError as exc:
        if isinstance(exc, TwirlError):
            raise
        raise ContractError(f"invalid measure {text!r}: {exc}") from exc


def _measure_config(m: AbelianMeasure) -> dict:
    return m.to_json()


def _design(args):
    kind, _, rest = args.design.partition(":")
    if kind == "builtin":
        if rest not in BUILTIN_NAMES:
            raise ContractError(f"unknown builtin design {rest!r}; choose from {', '.join(BUILTIN_NAMES)}")
        measure = _measure(args.measure, 2, "SL") if rest == "sl2c_product" else None
        return builtin_design(rest, measure)
    if kind == "file":
        return decode_design(read_json(rest), name=Path(rest).name)
    raise ContractError(f"--design must be builtin:NAME or file:PATH, got {args.design!r}")


def _cptp(j: ChoiOperator, tol: float) -> dict:
    report = check_cp_tp(j, tol)
    reduced = partial_trace(j.matrix, j.space, j.output_factors)
    top = float(np.linalg.eigvalsh(0.5 * (reduced + reduced.conj().T))[-1])
    return {
        "cp": report.is_cp,
        "tp": report.is_tp,
        "trace_nonincreasing": top <= 1.0 + tol,
        "min_eigenvalue": report.min_eigenvalue,
        "tp_residual": report.tp_residual,
        "max_input_marginal_eigenvalue": top,
    }


def _base_config(args, j: ChoiOperator | None = None) -> dict:
    cfg = {"command": args.command, "input": args.input, "tol": args.tol, "version": __version__}
    if j is not None:
        cfg.update(d=j.d, t_in=j.t_in, t_out=j.t_out)
    return cfg


def _float(x: float):
    return None if not np.isfinite(x) else float(x)


# ----------------------------------------------------------------------------- commands


def cmd_twirl(args) -> dict:
    j = _load_channel(args)
    out = twirl_channel_exact(j, route=args.route)
    return {"config": {**_base_config(args, j), "route": args.route}, "choi": encode_choi(out), "cptp": _cptp(out, args.tol)}


def cmd_mc_twirl(args) -> dict:
    j = _load_channel(args)
    cfg = {
        **_base_config(args, j),
        "group": args.group,
        "samples": args.samples,
        "seed": args.seed,
        "streams": args.streams,
    }
    if args.group == "SL":
        measure = _measure(args.measure, j.d, "SL")
        cfg["measure"] = _measure_config(measure)
        est = mc_cartan_twirl(j, CartanGroupSpec(j.d, "SL"), measure, args.samples, args.seed, args.streams)
    else:
        if args.measure is not None:
            raise ContractError("--measure applies only to --group SL")
        est = mc_channel_twirl(j, n=args.samples, seed=args.seed, streams=args.streams)
    mean = j.replace(est.mean)
    return {
        "config": cfg,
        "choi": encode_choi(mean),
        "n_samples": est.n_samples,
        "stderr_proxy": _float(est.stderr_proxy),
    }


def cmd_cartan_twirl(args) -> dict:
    j = _load_channel(args)
    measure = _measure(args.measure, j.d, args.group)
    spec = CartanGroupSpec(j.d, args.group)
    cfg = {**_base_config(args, j), "group": args.group, "route": args.route, "measure": _measure_config(measure)}
    result = {"config": cfg}
    if args.route == "kak":
        out = kak_channel_twirl(j, spec, measure)
    else:
        out = cartan_channel_twirl(j, spec, measure, route=args.route)
        if args.route == "direct":
            rep = choi_representation(Representation.collective(j.d, j.t_out), Representation.collective(j.d, j.t_in))
        else:
            rep = Representation.collective(j.d, j.t_out + j.t_in)
        dec = sector_decomposition(rep)
        beta = beta_weights(measure, rep, dec)
        result["sectors"] = _sector_weights(dec, beta)
    result["choi"] = encode_choi(out)
    result["cptp"] = _cptp(out, args.tol)
    return result


def _sector_weights(dec, beta) -> list[dict]:
    return [
        {"label": s.label, "d_u": s.d_u, "d_c": s.d_c, "beta": float(b), "weight": float(w)}
        for s, b, w in zip(dec.sectors, beta.beta, beta.weights)
    ]


def cmd_dual_twirl(args) -> dict:
    j = _load_channel(args)
    measure = _measure(args.measure, j.d, args.group)
    spec = CartanGroupSpec(j.d, args.group)
    if spec.is_compact and not measure.is_trivial:
        raise ContractError(f"compact group {spec.group} has a trivial Abelian part; use the point measure")
    rep = choi_representation(Representation.collective(j.d, j.t_out), Representation.collective(j.d, j.t_in))
    dec = sector_decomposition(rep)
    beta = beta_weights(measure, rep, dec)
    out = dual_channel_twirl(j, dec, beta)
    top = float(np.linalg.eigvalsh(kraus_sum(dec, beta))[-1])
    return {
        "config": {**_base_config(args, j), "group": args.group, "measure": _measure_config(measure)},
        "choi": encode_choi(out),
        "sectors": _sector_weights(dec, beta),
        "weight_sum": beta.weight_sum,
        "kraus_sum_max_eigenvalue": top,
        "cptp": _cptp(out, args.tol),
    }


def cmd_design_twirl(args) -> dict:
    j = _load_channel(args)
    design = _design(args)
    report = None
    try:
        report = verify_design(design, args.tol)
    except ResourceGuardError:
        pass
    if report is not None and report.passed:
        design = replace(design, verified=True)
    out = design_channel_twirl(j, design)
    cfg = {**_base_config(args, j), "design": args.design, "measure": args.measure}
    return {
        "config": cfg,
        "choi": encode_choi(out),
        "design": {
            "name": design.name,
            "t": design.t,
            "group": design.group,
            "size": len(design),
            "verified": design.verified,
            "max_deviation": None if report is None else report.max_deviation,
        },
    }


def _decompose_rep(args) -> Representation:
    d = args.d or 2
    if args.factors:
        mapping = {"p": PLAIN, "c": CONJUGATE}
        try:
            factors = tuple(mapping[c] for c in args.factors)
        except KeyError as exc:
            raise ContractError(f"--factors may contain only 'p' and 'c', got {args.factors!r}") from exc
        rep = Representation(d, factors)
    else:
        t_in = args.t_in or 1
        t_out = args.t_out or 1
        if args.route == "gamma":
            rep = Representation.collective(d, t_out + t_in)
        else:
            rep = choi_representation(Representation.collective(d, t_out), Representation.collective(d, t_in))
    _guard(d, len(rep.factors))
    return rep


def cmd_decompose(args) -> dict:
    rep = _decompose_rep(args)
    dec = decompose(rep)
    factors = "".join("p" if f == PLAIN else "c" for f in rep.factors)
    return {
        "config": {**_base_config(args), "d": rep.d, "factors": factors, "route": args.route},
        "dimension": dec.dim,
        "sectors": [
            {"label": s.label, "d_u": s.d_u, "d_c": s.d_c, "dim": s.dim, "projector": encode_matrix(s.projector)}
            for s in dec.sectors
        ],
    }


def cmd_verify_design(args) -> dict:
    design = _design(args)
    report = verify_design(design, args.tol, args.t)
    return {
        "config": {**_base_config(args), "design": args.design, "t": report.t, "measure": args.measure},
        "pass": report.passed,
        "max_deviation": report.max_deviation,
        "name": design.name,
        "size": len(design),
    }


def cmd_info(args) -> dict:
    j = _load_channel(args)
    herm = float(np.abs(j.matrix - j.matrix.conj().T).max())
    result = {
        "config": _base_config(args, j),
        "d": j.d,
        "t_in": j.t_in,
        "t_out": j.t_out,
        "dim_in": j.dim_in,
        "dim_out": j.dim_out,
        "trace": float(np.real(np.trace(j.matrix))),
        "hermiticity_defect": herm,
        "cptp": _cptp(j, args.tol),
    }
    try:
        result["kraus_rank"] = len(kraus_from_choi(j, args.tol).kraus_ops)
    except NotPSDError:
        result["kraus_rank"] = None
    return result


COMMANDS = {
    "twirl": cmd_twirl,
    "mc-twirl": cmd_mc_twirl,
    "cartan-twirl": cmd_cartan_twirl,
    "dual-twirl": cmd_dual_twirl,
    "design-twirl": cmd_design_twirl,
    "decompose": cmd_decompose,
    "verify-design": cmd_verify_design,
    "info": cmd_info,
}


def run(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    """Execute one command; returns the exit code."""
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    args = build_parser().parse_args(argv)
    try:
        text = dumps(COMMANDS[args.command](args))
    except MalformedInput as exc:
        print(f"error: malformed input: {exc}", file=stderr)
        return EXIT_MALFORMED
    except ResourceGuardError as exc:
        print(f"error: resource guard: {exc}", file=stderr)
        return EXIT_GUARD
    except (ContractError, ShapeError, TwirlError) as exc:
        print(f"error: contract violation: {exc}", file=stderr)
        return EXIT_CONTRACT
    if args.output:
        Path(args.output).write_text(text)
    else:
        stdout.write(text)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
