"""Command-line interface: sampling, enumeration, statistics, rendering.

Exit codes: 0 success, 2 invalid input, 3 untileable domain or infeasible
boundary, 4 non-monotone six-vertex weights, 5 CFTP convergence cap hit.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import rng
from .cftp import cftp_sample_many
from .errors import (
    ConvergenceCapExceeded,
    InfeasibleBoundary,
    NonMonotoneWeights,
    TileSamplerError,
    UntileableDomain,
)
from .lattice import Domain, Tiling, Uniform, VolumeWeights, extremal_tilings
from .lozenge import (
    LozengeTiling,
    TriDomain,
    loz_cftp,
    loz_extremal,
    loz_random_walk_batch,
)
from .oracle import (
    enumerate_domino_tilings,
    enumerate_lozenge_tilings,
    enumerate_sixvertex,
    exact_distribution,
)
from .render import render
from .sixvertex import (
    FaceHeights,
    SixVertexConfig,
    SVWeights,
    config_from_heights,
    dwbc,
    sv_cftp,
    sv_extremal,
    sv_random_walk_batch,
)
from .stats import SampleArchive, density_map, scalar_observable
from .sweeps import MultiThreaded, Sequential, SweepPlan


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--model", choices=("domino", "lozenge", "sixvertex"), default="domino")
    p.add_argument("--domain", help="domain file (domino: 0/1 grid, lozenge: triangle grids)")
    p.add_argument("--aztec", type=int, help="Aztec diamond order")
    p.add_argument("--square", type=int, help="square side (faces)")
    p.add_argument("--hexagon", help="lozenge hexagon sides A,B,C")
    p.add_argument("--dwbc", type=int, help="six-vertex domain-wall size")
    p.add_argument("--weights", default="", help="e.g. q=20 or a=1,b=1,c=2")
    p.add_argument("--seed", default="1", help="decimal or 0x-hex master seed")
    p.add_argument("--samples", type=int, default=1)
    p.add_argument("--steps", type=int, help="sweeps per MCMC sample (required for `sample`)")
    p.add_argument("--backend", choices=("seq", "threads"), default="seq")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--format", choices=("txt", "csv", "svg"), default="txt")


def _parse_seed(text: str) -> int:
    return int(text, 0)


def _parse_weights(model: str, text: str):
    fields = {}
    if text:
        for part in text.split(","):
            key, _, val = part.partition("=")
            if not val:
                raise ValueError(f"bad weight entry {part!r}")
            fields[key.strip()] = float(val)
    if model == "sixvertex":
        return SVWeights(fields.get("a", 1.0), fields.get("b", 1.0), fields.get("c", 1.0))
    if "q" in fields:
        return VolumeWeights(fields["q"])
    return Uniform()


def _build_domain(args):
    model = args.model
    if model == "domino":
        if args.aztec:
            return Domain.aztec(args.aztec)
        if args.square:
            return Domain.square(args.square)
        if args.domain:
            with open(args.domain) as fh:
                return Domain.from_text(fh.read())
        raise ValueError("domino model needs --aztec, --square, or --domain")
    if model == "lozenge":
        if args.hexagon:
            a, b, c = (int(x) for x in args.hexagon.split(","))
            return TriDomain.hexagon(a, b, c)
        if args.domain:
            with open(args.domain) as fh:
                return TriDomain.from_text(fh.read())
        raise ValueError("lozenge model needs --hexagon or --domain")
    if args.dwbc:
        return dwbc(args.dwbc)
    raise ValueError("sixvertex model needs --dwbc")


def _backend(args):
    if args.backend == "seq":
        return Sequential()
    threads = args.threads or int(os.environ.get("TILESAMPLER_THREADS", "4"))
    return MultiThreaded(threads)


def _write(args, text: str):
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _sample_states(args, domain, weights, backend, exact: bool):
    """Draw --samples states, exactly (CFTP) or by finite MCMC runs."""
    model = args.model
    seed = _parse_seed(args.seed)
    count = args.samples
    if exact:
        if model == "domino":
            return cftp_sample_many(domain, SweepPlan(domain, weights), seed, count, backend)
        if model == "lozenge":
            out = loz_cftp(domain, weights, seed, backend, count=count)
            return out if isinstance(out, list) else [out]
        out = sv_cftp(domain.n, domain, weights, seed, backend, count=count)
        return out if isinstance(out, list) else [out]
    if args.steps is None:
        raise ValueError("MCMC sampling requires an explicit --steps")
    seeds = np.array(
        [rng.derive_seed(seed, k, rng.TAG_DERIVE) for k in range(count)], dtype=np.uint64
    )
    if model == "domino":
        ext = extremal_tilings(domain)
        if ext is None:
            raise UntileableDomain("domain is not tileable")
        start = np.repeat(ext[1].states[None], count, axis=0)
        from .sweeps import random_walk_batch

        states = random_walk_batch(start, seeds, args.steps, SweepPlan(domain, weights), backend)
        return [Tiling(domain, s) for s in states]
    if model == "lozenge":
        ext = loz_extremal(domain)
        if ext is None:
            raise UntileableDomain("triangle domain is not tileable")
        start = np.repeat(ext[1].edges[None], count, axis=0)
        states = loz_random_walk_batch(start, seeds, args.steps, domain, weights, backend)
        return [LozengeTiling(domain, s) for s in states]
    if not isinstance(weights, SVWeights):
        raise ValueError("sixvertex model needs a=,b=,c= weights")
    lo = sv_extremal(domain.n, domain)[1]
    start = np.repeat(lo.heights[None], count, axis=0)
    states = sv_random_walk_batch(start, seeds, args.steps, weights, backend)
    return [config_from_heights(FaceHeights(domain.n, h)) for h in states]


def _make_archive(args, domain, weights, states, sampler: str) -> str:
    arc = SampleArchive.create(
        args.model,
        domain,
        args.weights or "uniform",
        _parse_seed(args.seed),
        args.backend,
        sampler,
    )
    arc.extend(states)
    import io

    buf = io.StringIO()
    arc.dump(buf)
    return buf.getvalue()


def _cmd_sample(args) -> int:
    domain = _build_domain(args)
    weights = _parse_weights(args.model, args.weights)
    states = _sample_states(args, domain, weights, _backend(args), exact=False)
    _write(args, _make_archive(args, domain, weights, states, f"mcmc steps={args.steps}"))
    return 0


def _cmd_cftp(args) -> int:
    domain = _build_domain(args)
    weights = _parse_weights(args.model, args.weights)
    states = _sample_states(args, domain, weights, _backend(args), exact=True)
    _write(args, _make_archive(args, domain, weights, states, "cftp"))
    return 0


def _enumerate(args, domain):
    if args.model == "domino":
        return enumerate_domino_tilings(domain)
    if args.model == "lozenge":
        return enumerate_lozenge_tilings(domain)
    return enumerate_sixvertex(domain)


def _cmd_enumerate(args) -> int:
    states = _enumerate(args, _build_domain(args))
    _write(args, f"{len(states)}\n")
    return 0


def _cmd_dist(args) -> int:
    domain = _build_domain(args)
    weights = _parse_weights(args.model, args.weights)
    states = _enumerate(args, domain)
    dist = exact_distribution(states, weights)
    sep = "," if args.format == "csv" else "\t"
    lines = [f"state{sep}probability"]
    for i, s in enumerate(states):
        lines.append(f"{i}{sep}{dist[s]:.10f}")
    _write(args, "\n".join(lines) + "\n")
    return 0


def _load_archive(args, domain):
    if not getattr(args, "infile", None):
        raise ValueError("this command needs --in ARCHIVE")
    with open(args.infile) as fh:
        return SampleArchive.load(fh, domain)


def _cmd_density(args) -> int:
    domain = _build_domain(args)
    arc = _load_archive(args, domain)
    dm = density_map(arc, args.observable)
    if args.format == "csv":
        _write(args, dm.to_csv())
    else:
        rows = [" ".join(f"{x:.4f}" for x in row) for row in dm.grid]
        _write(args, "\n".join(rows) + "\n")
    return 0


def _cmd_hist(args) -> int:
    domain = _build_domain(args)
    arc = _load_archive(args, domain)
    h = scalar_observable(arc, args.observable, bins=args.bins)
    _write(args, h.to_csv())
    return 0


def _cmd_render(args) -> int:
    domain = _build_domain(args)
    if getattr(args, "infile", None):
        with open(args.infile) as fh:
            text = fh.read()
        if args.model == "domino":
            state = Tiling.from_text(domain, text)
        elif args.model == "sixvertex":
            state = SixVertexConfig.from_text(text)
        else:
            bits = np.array([ch == "1" for ch in text.strip()])
            sx, sy = domain.size
            state = LozengeTiling(domain, bits.reshape(3, sx + 1, sy + 1))
    else:
        weights = _parse_weights(args.model, args.weights)
        state = _sample_states(args, domain, weights, _backend(args), exact=True)[0]
    _write(args, render(state))
    return 0


def _cmd_selftest(args) -> int:
    failures = 0

    def check(name, fn):
        nonlocal failures
        try:
            ok = fn()
        except Exception as exc:  # pragma: no cover - diagnostic path
            ok = False
            name = f"{name} ({exc})"
        print(("ok   " if ok else "FAIL ") + name)
        failures += 0 if ok else 1

    check("domino enumeration 2x2 -> 2", lambda: len(enumerate_domino_tilings(Domain.square(2))) == 2)
    check(
        "domino enumeration 2x3 -> 3",
        lambda: len(enumerate_domino_tilings(Domain.rectangle(2, 3))) == 3,
    )
    check("aztec-2 enumeration -> 8", lambda: len(enumerate_domino_tilings(Domain.aztec(2))) == 8)
    check(
        "lozenge unit hexagon -> 2",
        lambda: len(enumerate_lozenge_tilings(TriDomain.hexagon(1, 1, 1))) == 2,
    )
    check("six-vertex dwbc(3) -> 7", lambda: len(enumerate_sixvertex(dwbc(3))) == 7)

    def cftp_uniform():
        domain = Domain.square(2)
        samples = cftp_sample_many(domain, SweepPlan(domain), 7, 2000)
        freq = sum(1 for t in samples if t.state((1, 1)) == 3) / 2000
        return abs(freq - 0.5) < 0.05

    check("cftp 2x2 roughly uniform", cftp_uniform)

    def determinism():
        domain = Domain.aztec(2)
        plan = SweepPlan(domain)
        a = cftp_sample_many(domain, plan, 99, 3, Sequential())
        b = cftp_sample_many(domain, plan, 99, 3, MultiThreaded(4))
        return all(x == y for x, y in zip(a, b))

    check("seq/threads bit-identical", determinism)
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tilesampler",
        description="Exact and MCMC sampling of dominoes, lozenges, and six-vertex states",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (
        ("sample", _cmd_sample),
        ("cftp", _cmd_cftp),
        ("enumerate", _cmd_enumerate),
        ("dist", _cmd_dist),
        ("density", _cmd_density),
        ("hist", _cmd_hist),
        ("render", _cmd_render),
        ("selftest", _cmd_selftest),
    ):
        p = sub.add_parser(name)
        _add_common(p)
        p.set_defaults(fn=fn)
        if name in ("density", "hist", "render"):
            p.add_argument("--in", dest="infile", help="input archive or state file")
        if name == "density":
            p.add_argument(
                "--observable",
                default="h-edge",
                choices=("h-edge", "v-edge", "c-vertex", "domino-orientation"),
            )
        if name == "hist":
            p.add_argument(
                "--observable", default="c-vertex-count", choices=("c-vertex-count", "y-intercept")
            )
            p.add_argument("--bins", type=int, default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (UntileableDomain, InfeasibleBoundary) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except NonMonotoneWeights as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except ConvergenceCapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 5
    except (TileSamplerError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
