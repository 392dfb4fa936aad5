"""Command-line front end: file I/O, dispatch, and deterministic run manifests.

Exit codes: 0 success/certified, 1 refuted/false, 2 inconclusive,
3 usage or I/O error.  All randomness flows through --seed (default 0) and all
emitted reals carry 12 significant digits, so reruns with identical inputs are
byte-identical.
"""

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    ContractionUnverified,
    LimitConeError,
    NotProximal,
    SeparationViolated,
)
from .limits import WordSampler, compare_mu_lambda, enumerate_words, estimate_cone, estimate_limit_set
from .projgeom import GroupElement
from .projections import (
    cartan_projection,
    iterated_cartan,
    jordan_projection,
    opposition_involution,
    regularity_gaps,
)
from .proximality import certify_eps_proximal
from .schottky import TargetCone, forge_group, forge_semigroup, verify_schottky

EXIT_OK = 0
EXIT_REFUTED = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def fmt(x: float) -> str:
    return f"{float(x):.12g}"


def _round12(obj):
    if isinstance(obj, float):
        return float(fmt(obj))
    if isinstance(obj, (list, tuple)):
        return [_round12(o) for o in obj]
    if isinstance(obj, dict):
        return {k: _round12(v) for k, v in obj.items()}
    if isinstance(obj, np.ndarray):
        return _round12(obj.tolist())
    return obj


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_manifest(command, inputs, seed, outputs):
    digests = {str(p): _sha256(Path(p)) for p in inputs}
    manifest = {
        "command": command,
        "inputs": digests,
        "seed": seed,
        "version": f"limitcone {__version__}",
        "outputs": [str(o) for o in outputs],
    }
    for out in outputs:
        Path(str(out) + ".manifest.json").write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n"
        )


def load_matrix(path) -> GroupElement:
    doc = json.loads(Path(path).read_text())
    entries = np.asarray(doc["entries"], dtype=float)
    if "n" in doc and int(doc["n"]) != entries.shape[0]:
        raise UsageError(f"{path}: declared n does not match the entries")
    return GroupElement.from_matrix(entries)


def load_system(path):
    doc = json.loads(Path(path).read_text())
    gens = [GroupElement.from_matrix(np.asarray(g, dtype=float)) for g in doc["generators"]]
    kind = doc.get("kind", "semigroup")
    eps = doc.get("epsilons", [0.1] * len(gens))
    return gens, kind, [float(e) for e in eps]


def dump_system(path, generators, kind, epsilons, extra=None):
    # generator entries keep full precision: certification consumes them, and
    # at Schottky condition numbers truncated digits would not re-certify
    doc = {
        "generators": [g.entries.tolist() for g in generators],
        "kind": kind,
        "epsilons": _round12(list(epsilons)),
    }
    if extra:
        doc.update(_round12(extra))
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _print_row(label, values, out):
    print(label + "," + ",".join(fmt(v) for v in values), file=out)


def _cmd_project(args, out):
    g = load_matrix(args.matrix)
    mu = cartan_projection(g)
    lam = (
        iterated_cartan(g, args.iterate) if args.iterate else jordan_projection(g)
    )
    _print_row("mu", mu.coords, out)
    _print_row("lambda", lam.coords, out)
    _print_row("iota_lambda", opposition_involution(lam).coords, out)
    _print_row("gaps", regularity_gaps(g), out)
    return EXIT_OK


def _cmd_certify(args, out):
    g = load_matrix(args.matrix)
    try:
        cert = certify_eps_proximal(
            g,
            args.degree,
            args.epsilon,
            mode=args.mode,
            sample_count=args.samples,
            seed=args.seed,
        )
    except (NotProximal, SeparationViolated) as e:
        print(f"refuted: {e}", file=out)
        return EXIT_REFUTED
    except ContractionUnverified as e:
        print(f"{'refuted' if e.refuted else 'inconclusive'}: {e}", file=out)
        return EXIT_REFUTED if e.refuted else EXIT_INCONCLUSIVE
    print(
        f"certified: degree {args.degree} epsilon {fmt(cert.epsilon)} "
        f"gap {fmt(cert.gap_value)} lipschitz {fmt(cert.lipschitz_bound)} "
        f"mode {cert.mode}",
        file=out,
    )
    return EXIT_OK


def _cmd_certify_schottky(args, out):
    gens, kind, eps = load_system(args.system)
    if args.kind:
        kind = args.kind
    if args.epsilon is not None:
        eps = [args.epsilon] * len(gens)
    try:
        system = verify_schottky(
            gens, kind=kind, epsilons=eps, mode=args.mode, samples=args.samples, seed=args.seed
        )
    except (NotProximal, SeparationViolated) as e:
        print(f"refuted: {e}", file=out)
        return EXIT_REFUTED
    except ContractionUnverified as e:
        print(f"{'refuted' if e.refuted else 'inconclusive'}: {e}", file=out)
        return EXIT_REFUTED if e.refuted else EXIT_INCONCLUSIVE
    print(
        f"certified: {kind} with {system.t} generators, "
        f"min separation {fmt(float(np.nanmin(system.separation)))}",
        file=out,
    )
    return EXIT_OK


def _cmd_forge(args, out):
    doc = json.loads(Path(args.rays).read_text())
    cone = TargetCone.from_rays(
        [np.asarray(r, dtype=float) for r in doc["rays"]],
        margin=float(doc.get("margin", 0.05)),
    )
    forge = forge_group if args.group else forge_semigroup
    system = forge(args.n, cone, args.epsilon, seed=args.seed)
    out_path = args.out
    dump_system(
        out_path,
        system.generators,
        system.kind,
        system.epsilons,
        extra={"forge_report": system.forge_report},
    )
    summary = Path(out_path).with_suffix(".summary.txt")
    lines = [
        f"certified {system.kind} with {system.t} generators in SL({system.n})",
        f"epsilon {fmt(args.epsilon)}",
        f"powers {system.forge_report['powers']}",
        f"max word-direction distance to cone "
        f"{fmt(system.forge_report['max_direction_distance'])} "
        f"over {system.forge_report['word_count']} words of length <= "
        f"{system.forge_report['word_depth']}",
    ]
    summary.write_text("\n".join(lines) + "\n")
    _write_manifest("forge", [args.rays], args.seed, [out_path, summary])
    print(f"wrote {out_path}", file=out)
    return EXIT_OK


def _make_sampler(args, gens, kind):
    if getattr(args, "random", None):
        return WordSampler(
            generators=tuple(gens),
            kind=kind,
            max_length=args.depth,
            strategy="random",
            seed=args.seed,
            count=args.random,
        )
    return WordSampler(
        generators=tuple(gens), kind=kind, max_length=args.depth, strategy="exhaustive"
    )


def _cmd_estimate_cone(args, out):
    gens, kind, _ = load_system(args.system)
    sampler = _make_sampler(args, gens, kind)
    est = estimate_cone(sampler)
    prefix = Path(args.out)
    rays_csv = prefix.with_suffix(".rays.csv")
    dirs_csv = prefix.with_suffix(".directions.csv")
    summary_json = prefix.with_suffix(".summary.json")
    rays_csv.write_text(
        "\n".join(",".join(fmt(x) for x in r.coords) for r in est.hull_rays) + "\n"
    )
    dirs_csv.write_text(
        "\n".join(",".join(fmt(x) for x in d.coords) for d in est.directions) + "\n"
    )
    summary = {
        "hull_dim": est.hull_dim,
        "rays": [_round12(r.coords) for r in est.hull_rays],
        "max_mu_lambda_gap": _round12(max(est.per_word_mu_lambda_gap)),
    }
    summary_json.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    _write_manifest(
        "estimate-cone", [args.system], args.seed, [rays_csv, dirs_csv, summary_json]
    )
    print(f"hull_dim {est.hull_dim}", file=out)
    return EXIT_OK


def _cmd_limit_set(args, out):
    gens, kind, _ = load_system(args.system)
    sampler = _make_sampler(args, gens, kind)
    side = {"fwd": "forward", "bwd": "backward"}[args.side]
    sample = estimate_limit_set(sampler, side=side)
    prefix = Path(args.out)
    outputs = []
    for k in range(1, sampler.n):
        path = prefix.with_suffix(f".deg{k}.csv")
        path.write_text(
            "\n".join(
                ",".join(fmt(x) for x in p.rep) for p in sample.cloud(k)
            )
            + "\n"
        )
        outputs.append(path)
    _write_manifest("limit-set", [args.system], args.seed, outputs)
    print(
        f"{side} limit set: "
        + ", ".join(f"deg {k}: {len(sample.cloud(k))} points" for k in range(1, sampler.n)),
        file=out,
    )
    return EXIT_OK


def _cmd_compare(args, out):
    gens, kind, _ = load_system(args.system)
    sampler = _make_sampler(args, gens, kind)
    gaps = compare_mu_lambda(sampler)
    for length, g in enumerate(gaps, start=1):
        _print_row(f"length_{length}", [g], out)
    return EXIT_OK


def build_parser() -> _Parser:
    p = _Parser(prog="limitcone")
    p.add_argument("--version", action="version", version=f"limitcone {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("project")
    sp.add_argument("--matrix", required=True)
    sp.add_argument("--iterate", type=int, default=0)
    sp.set_defaults(func=_cmd_project)

    sp = sub.add_parser("certify")
    sp.add_argument("--matrix", required=True)
    sp.add_argument("--degree", type=int, required=True)
    sp.add_argument("--epsilon", type=float, required=True)
    sp.add_argument("--mode", choices=["analytic", "sampled"], default="sampled")
    sp.add_argument("--samples", type=int, default=10_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=_cmd_certify)

    sp = sub.add_parser("certify-schottky")
    sp.add_argument("--system", required=True)
    sp.add_argument("--kind", choices=["semigroup", "group"])
    sp.add_argument("--epsilon", type=float)
    sp.add_argument("--mode", choices=["analytic", "sampled"], default="sampled")
    sp.add_argument("--samples", type=int, default=10_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=_cmd_certify_schottky)

    sp = sub.add_parser("forge")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--rays", required=True)
    sp.add_argument("--epsilon", type=float, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--group", action="store_true")
    sp.add_argument("--out", default="system.json")
    sp.set_defaults(func=_cmd_forge)

    sp = sub.add_parser("estimate-cone")
    sp.add_argument("--system", required=True)
    sp.add_argument("--depth", type=int, required=True)
    sp.add_argument("--random", type=int, default=0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default="cone")
    sp.set_defaults(func=_cmd_estimate_cone)

    sp = sub.add_parser("limit-set")
    sp.add_argument("--system", required=True)
    sp.add_argument("--depth", type=int, required=True)
    sp.add_argument("--side", choices=["fwd", "bwd"], required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default="limitset")
    sp.set_defaults(func=_cmd_limit_set)

    sp = sub.add_parser("compare")
    sp.add_argument("--system", required=True)
    sp.add_argument("--depth", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=_cmd_compare)

    return p


def run(argv, out=None) -> int:
    """Dispatch a command line; returns the exit code."""
    out = out if out is not None else sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args, out)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, json.JSONDecodeError, KeyError) as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except LimitConeError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run(sys.argv[1:]))
