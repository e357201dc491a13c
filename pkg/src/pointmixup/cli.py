"""Command line entry point: ``pointmixup {sample,emd,mix,verify,train}``.

Exit codes: 0 success, 2 usage error, 3 invalid input, 4 solver or capacity
failure, 5 verification failure.  Every command is deterministic given its
flags and ``--seed``; ``--threads`` never changes output bytes.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import emd as emd_mod
from .alignment import AlignmentConfig, align_pair
from .cloud import (
    LabelDistribution,
    format_xyz,
    normalize_unit_sphere,
    read_xyz,
    replicate_to_cardinality,
)
from .errors import (
    CapacityError,
    InvalidArgumentError,
    InvalidInputError,
    ParseError,
    SolverError,
)
from .interpolation import mix, mix_labels, sample_lambda
from .mesh import read_off, sample_surface

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_SOLVER = 4
EXIT_VERIFY = 5


def _write_text(path, text):
    with open(path, "w", newline="\n") as f:
        f.write(text)


def cmd_sample(args) -> int:
    mesh = read_off(args.mesh)
    cloud = sample_surface(mesh, args.n, np.random.default_rng(args.seed))
    if args.normalize:
        cloud = normalize_unit_sphere(cloud)
    _write_text(args.out, format_xyz(cloud))
    return EXIT_OK


def cmd_emd(args) -> int:
    a, b = read_xyz(args.a), read_xyz(args.b)
    if args.exact:
        res = emd_mod.emd_exact(a, b, cap=args.cap)
    elif args.approx:
        res = emd_mod.emd_approx(a, b, epsilon=args.epsilon)
    else:
        res = emd_mod.emd(a, b, cap=args.cap, epsilon=args.epsilon)
    print(f"distance {res.distance:.17g}")
    print(f"n {res.assignment.n}")
    print(f"solver {res.solver}")
    print(f"exact {str(res.exact).lower()}")
    print(f"gap_bound {res.gap_bound:.6g}")
    if args.dump_assignment:
        _write_text(args.dump_assignment, "".join(f"{j}\n" for j in res.perm))
    return EXIT_OK


def cmd_mix(args) -> int:
    rng = np.random.default_rng(args.seed)
    a, b = read_xyz(args.a), read_xyz(args.b)
    if args.normalize:
        a, b = normalize_unit_sphere(a), normalize_unit_sphere(b)
    n = max(a.n, b.n)
    a = replicate_to_cardinality(a, n, rng)
    b = replicate_to_cardinality(b, n, rng)
    if args.align:
        a, b = align_pair(a, b, AlignmentConfig(up_axis=args.up_axis))
    lam = args.lam if args.lam is not None else sample_lambda(args.gamma, rng)
    out = mix(a, b, lam, args.strategy.upper(), rng=rng)
    _write_text(args.out, format_xyz(out))

    label_flags = (args.label_a, args.label_b, args.classes)
    if any(v is not None for v in label_flags) or args.label_out:
        if any(v is None for v in label_flags) or not args.label_out:
            raise InvalidArgumentError(
                "--label-a, --label-b, --classes and --label-out must be given together"
            )
        c1 = LabelDistribution.one_hot(args.label_a, args.classes)
        c2 = LabelDistribution.one_hot(args.label_b, args.classes)
        mixed = mix_labels(c1, c2, lam)
        _write_text(args.label_out, "".join(f"{p:.17g}\n" for p in mixed.probs))
    print(f"lambda {lam:.17g}")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import VerifyConfig, run_all

    kw = {}
    if args.instances is not None:
        kw["instances"] = args.instances
        kw["control_instances"] = args.instances
    cfg = VerifyConfig(seed=args.seed, suite=args.suite, n_override=args.n,
                       approx_ok=args.approx_ok, **kw)
    report = run_all(cfg)
    if args.report:
        report.write(args.report)
    sys.stdout.write(report.table())
    return EXIT_OK if report.ok else EXIT_VERIFY


def cmd_train(args) -> int:
    from .synthetic import make_synthetic_dataset
    from .toy import TrainConfig, save_weights, train

    rng = np.random.default_rng(args.seed)
    ds_kw = dict(n_points=args.n_points, heading_randomization=args.unaligned,
                 stretch=args.stretch)
    train_set = make_synthetic_dataset(per_class=args.per_class, rng=rng, **ds_kw)
    test_set = make_synthetic_dataset(per_class=args.test_per_class, rng=rng, **ds_kw)
    cfg = TrainConfig(
        strategy=args.strategy,
        gamma=args.gamma,
        epochs=args.epochs,
        batch_size=args.batch_size,
        lr=args.lr,
        seed=args.seed,
        mix_layer=args.layer,
        smoothing=args.smoothing,
        jitter=args.jitter,
        align=args.align,
        schedule=args.schedule,
    )
    net, history = train(train_set, cfg, test_set)
    table = history.table()
    if args.metrics:
        _write_text(args.metrics, table)
    else:
        sys.stdout.write(table)
    if args.weights:
        save_weights(net, args.weights)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pointmixup", description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1,
                   help="accepted for interface stability; output never depends on it")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample", help="sample a point cloud from an OFF mesh")
    s.add_argument("--mesh", required=True)
    s.add_argument("--n", type=int, default=1024)
    s.add_argument("--out", required=True)
    s.add_argument("--normalize", action="store_true")
    s.set_defaults(func=cmd_sample)

    e = sub.add_parser("emd", help="earth mover's distance between two XYZ clouds")
    e.add_argument("--a", required=True)
    e.add_argument("--b", required=True)
    g = e.add_mutually_exclusive_group()
    g.add_argument("--exact", action="store_true")
    g.add_argument("--approx", action="store_true")
    e.add_argument("--epsilon", type=float, default=emd_mod.DEFAULT_EPSILON)
    e.add_argument("--cap", type=int, default=emd_mod.EXACT_CAP)
    e.add_argument("--dump-assignment")
    e.set_defaults(func=cmd_emd)

    m = sub.add_parser("mix", help="interpolate two XYZ clouds")
    m.add_argument("--a", required=True)
    m.add_argument("--b", required=True)
    r = m.add_mutually_exclusive_group(required=True)
    r.add_argument("--lambda", dest="lam", type=float)
    r.add_argument("--gamma", type=float)
    m.add_argument("--strategy", choices=("oa", "ra", "ps"), default="oa")
    m.add_argument("--align", action="store_true")
    m.add_argument("--up-axis", choices=("x", "y", "z"), default="z")
    m.add_argument("--normalize", action="store_true")
    m.add_argument("--out", required=True)
    m.add_argument("--label-a", type=int)
    m.add_argument("--label-b", type=int)
    m.add_argument("--classes", type=int)
    m.add_argument("--label-out")
    m.set_defaults(func=cmd_mix)

    v = sub.add_parser("verify", help="run the interpolation property certificates")
    v.add_argument("--suite", choices=("all", "p1", "p2", "p3", "ps", "ra"), default="all")
    v.add_argument("--n", type=int, help="force one cloud size for every check")
    v.add_argument("--instances", type=int)
    v.add_argument("--report")
    v.add_argument("--approx-ok", action="store_true",
                   help="allow the auction solver for exact certificates above the cap")
    v.set_defaults(func=cmd_verify)

    t = sub.add_parser("train", help="train the toy classifier on synthetic shapes")
    t.add_argument("--strategy", default="none",
                   choices=("none", "input_mixup", "manifold_mixup", "input_only",
                            "fixed_layer", "label_smoothing"))
    t.add_argument("--gamma", type=float, default=1.0)
    t.add_argument("--epochs", type=int, default=200)
    t.add_argument("--per-class", type=int, default=20)
    t.add_argument("--test-per-class", type=int, default=100)
    t.add_argument("--n-points", type=int, default=256)
    t.add_argument("--batch-size", type=int, default=16)
    t.add_argument("--lr", type=float, default=0.05)
    t.add_argument("--layer", type=int, choices=(0, 1), default=1)
    t.add_argument("--smoothing", type=float, default=0.1)
    t.add_argument("--jitter", type=float, default=0.0)
    t.add_argument("--stretch", type=float, default=0.3)
    t.add_argument("--schedule", choices=("constant", "cosine"), default="cosine")
    t.add_argument("--unaligned", action="store_true")
    t.add_argument("--align", action="store_true")
    t.add_argument("--metrics")
    t.add_argument("--weights")
    t.set_defaults(func=cmd_train)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be at least 1")
    try:
        return args.func(args)
    except (InvalidInputError, InvalidArgumentError, ParseError, FileNotFoundError,
            IsADirectoryError, UnicodeDecodeError) as exc:
        print(f"pointmixup {args.command}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (CapacityError, SolverError) as exc:
        print(f"pointmixup {args.command}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
