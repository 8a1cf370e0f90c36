"""Command-line entry point: encode, reconstruct, studies and operator learning."""

import argparse
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from .analysis import (
    consistency_check,
    convergence_study,
    locality_setup,
    locality_study,
    mc_vs_quadrature,
    smoothness_rates,
)
from .basis import default_sobolev_order, make_basis
from .config import PRESETS, Settings, get_preset
from .decoder import normalize_grid, reconstruct_field, visual_transform
from .encoder import (
    JointManifoldFunction,
    encode,
    encode_joint,
    encode_measured,
    encode_pointcloud,
    encode_sampled,
    uniform_density,
)
from .errors import MFEError, UsageError
from .fields import make_test_field
from .formats import (
    load_checkpoint,
    load_dataset,
    load_encoded,
    load_manifold,
    save_checkpoint,
    save_dataset,
    save_encoded,
    write_grid_csv,
    write_pgm,
)
from .gram_cache import GramCache
from .neuralop.data import gen_poisson1d_dataset
from .neuralop.training import evaluate_relative_l2, train
from .reports import (
    rate_summary,
    write_consistency_table,
    write_locality_table,
    write_mc_table,
    write_rate_table,
    write_summary,
)

PROBLEMS = {
    "poisson1d": lambda count, n, seed: gen_poisson1d_dataset(count, n, seed),
    "poisson1d-boundary": lambda count, n, seed: gen_poisson1d_dataset(
        count, n, seed, boundary=True
    ),
}


def parse_list(text: str, kind=float) -> list:
    """Comma-separated numbers."""
    try:
        return [kind(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise UsageError(f"Could not parse list '{text}'") from None


def cmd_encode(args, settings: Settings):
    periodic = args.family == "fourier"
    if args.pointcloud:
        cloud, _ = load_manifold(args.pointcloud, periodic=periodic, d=args.dim)
        basis = make_basis(args.family, args.n, cloud.d)
        encoded = encode_pointcloud(cloud.manifold.vertices, cloud.values, basis, seed=args.seed)
        source = args.pointcloud
    else:
        mf, report = load_manifold(args.mesh, periodic=periodic, d=args.dim)
        for line in report.summary():
            if not line.startswith("✓") and settings.verbose:
                print(line)
        basis = make_basis(args.family, args.n, mf.d)
        encoded = _encode_mesh(mf, basis, args, periodic)
        source = args.mesh

    save_encoded(encoded, args.out)
    print(
        f"✓ Encoded {Path(source).name} with {args.family} n={args.n} "
        f"({', '.join(encoded.blocks)}) → {args.out}"
    )


def _encode_mesh(mf, basis, args, periodic: bool):
    if args.samples:
        if args.seed is None:
            raise UsageError("--samples needs an explicit --seed")
        return encode_sampled(mf, basis, args.samples, args.seed)
    if args.joint:
        components = [mf] + [load_manifold(p, periodic=periodic)[0] for p in args.joint]
        jmf = JointManifoldFunction.from_components(components)
        return encode_joint(jmf, basis, args.degree)
    if args.measured:
        return encode_measured(mf, uniform_density(mf), basis, args.degree, kind="density")
    return encode(mf, basis, args.degree, coordinate_blocks=args.coordinate_blocks)


def _write_grid(grid, stem: Path):
    write_grid_csv(grid, stem.with_suffix(".csv"))
    write_pgm(grid, stem.with_suffix(".pgm"))


def cmd_reconstruct(args, settings: Settings):
    encoded = load_encoded(args.encoded)
    blocks = list(encoded.blocks) if args.block == "all" else [args.block]
    gram = None
    if args.premultiply:
        s = default_sobolev_order(encoded.basis.d) if args.s is None else args.s
        gram = GramCache(settings.cache_dir).get(encoded.basis, s)
    out = Path(args.out)
    for block in blocks:
        grid = reconstruct_field(
            encoded,
            block,
            args.grid,
            premultiply=args.premultiply,
            gram=gram,
            slice_axis=args.slice_axis,
            slice_value=args.slice_value,
        )
        if args.log_transform:
            grid = normalize_grid(visual_transform(grid))
        stem = out.with_suffix("") if len(blocks) == 1 else out.with_name(f"{out.stem}_{block}")
        _write_grid(grid, stem)
        print(f"✓ Reconstructed block '{block}' on a {args.grid}-point grid → {stem}.pgm")


def cmd_study(args, settings: Settings):
    periodic = args.family == "fourier"
    mf, _ = load_manifold(args.mesh, periodic=periodic)
    basis_hint = make_basis(args.family, min(parse_list(args.n_list, int)), mf.d)
    test_functions = {
        name: make_test_field(name, basis_hint) for name in args.test_fn.split(",")
    }
    cache = GramCache(settings.cache_dir)
    study = convergence_study(
        mf,
        args.family,
        args.s,
        test_functions,
        parse_list(args.n_list, int),
        strict=False,
        gram_provider=cache.get,
        verbose=settings.verbose,
    )
    write_rate_table(study, args.out)
    summary = rate_summary(study)
    summary["super_algebraic"] = {
        f"{name}/{block}": all(checks.values())
        for (name, block), checks in smoothness_rates(study).items()
    }
    summary_path = Path(args.out).with_name(Path(args.out).stem + "_summary.json")
    write_summary(summary, summary_path)
    if study.all_at_floor():
        print("  → all errors at floor: the test function lies in the span")
    print(f"✓ Rate table → {args.out} (summary {summary_path})")


def cmd_consistency(args, settings: Settings):
    point = parse_list(args.point)
    basis = make_basis(args.family, args.n, len(point))
    f = make_test_field(args.test_fn) if args.test_fn else None
    rows = consistency_check(point, parse_list(args.radii), basis, f, resolution=args.resolution)
    write_consistency_table(rows, args.out)
    for prev, row in zip(rows, rows[1:]):
        if row.deviation > 0:
            print(f"  → r={row.radius:g}: ratio {prev.deviation / row.deviation:.3f}")
    print(f"✓ Consistency table → {args.out}")


def cmd_mc_study(args, settings: Settings):
    mf, _ = load_manifold(args.mesh)
    basis = make_basis(args.family, args.n, mf.d)
    study = mc_vs_quadrature(
        mf, basis, parse_list(args.N_list, int), args.seeds, base_seed=args.seed
    )
    write_mc_table(study, args.out)
    slope = "n/a" if study.slope is None else f"{study.slope:.3f}"
    print(f"✓ Monte Carlo table → {args.out} (slope {slope})")


def cmd_locality(args, settings: Settings):
    jmf, bump = locality_setup()
    n_list = parse_list(args.n_list, int)
    cache = GramCache(settings.cache_dir)
    rows = locality_study(jmf, bump, n_list, args.family, args.s, gram_provider=cache.get)
    out_dir = Path(args.out_dir)
    write_locality_table(rows, out_dir / "locality.csv")
    for n in n_list:
        encoded = encode_joint(jmf, make_basis(args.family, n, 2))
        for block in ("shape", "function"):
            grid = reconstruct_field(encoded, block, args.grid)
            _write_grid(normalize_grid(visual_transform(grid)), out_dir / f"n{n}_{block}")
    print(f"✓ Locality table and {2 * len(n_list)} grids → {out_dir}")


def cmd_gen_data(args, settings: Settings):
    dataset = PROBLEMS[args.problem](args.count, args.n, args.seed)
    save_dataset(dataset, args.out)
    print(f"✓ Generated {len(dataset)} {args.problem} samples (n={args.n}) → {args.out}")


def cmd_train(args, settings: Settings):
    dataset = load_dataset(args.data)
    preset = get_preset(args.preset)
    if args.iterations is not None:
        preset.train.iterations = args.iterations
    preset.train.mode = settings.training_mode
    print(
        f"Training {args.preset} preset for {preset.train.iterations} iterations "
        f"on {len(dataset)} samples..."
    )
    result = train(
        dataset,
        preset.network,
        preset.optimizer,
        preset.train,
        seed=args.seed,
        workers=settings.workers,
        verbose=settings.verbose,
    )
    save_checkpoint(
        result.net,
        preset.network,
        args.out,
        losses=result.losses,
        extra={"preset": args.preset, "dataset": dataset.metadata},
    )
    final = result.losses[-1] if result.losses else float("nan")
    print(f"✓ Trained model (final loss {final:.4e}) → {args.out}")


def cmd_evaluate(args, settings: Settings):
    net, _ = load_checkpoint(args.model)
    dataset = load_dataset(args.data)
    result = evaluate_relative_l2(net, dataset)
    if result.excluded:
        print(f"  → {result.excluded} sample(s) with degenerate targets excluded")
    print(f"✓ Mean relative L2 error: {result.mean!r}")


def cmd_validate(args, settings: Settings):
    _, report = load_manifold(args.mesh, periodic=args.periodic, d=args.dim)
    for line in report.summary():
        print(line)


def cmd_cache(args, settings: Settings):
    cache = GramCache(settings.cache_dir)
    if args.clear:
        cache.clear_all()
        return
    for key, value in cache.get_stats().items():
        print(f"  → {key}: {value}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mfe", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    families = ["legendre", "fourier"]

    p = sub.add_parser("encode", help="Encode a manifold function")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--mesh")
    source.add_argument("--pointcloud", help="CSV point cloud for a Monte Carlo encoding")
    p.add_argument("--dim", type=int, help="Coordinate count of a headerless point cloud")
    p.add_argument("--family", choices=families, default="legendre")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--joint", nargs="+", help="Further components of a joint encoding")
    p.add_argument("--measured", action="store_true", help="Uniform-density measured encoding")
    p.add_argument("--samples", type=int, help="Monte Carlo sample count drawn from the mesh")
    p.add_argument("--seed", type=int)
    p.add_argument("--degree", type=int)
    p.add_argument("--coordinate-blocks", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_encode)

    p = sub.add_parser("reconstruct", help="Sample the reconstruction field on a grid")
    p.add_argument("--encoded", required=True)
    p.add_argument("--grid", type=int, required=True)
    p.add_argument("--block", default="shape")
    p.add_argument("--s", type=int)
    p.add_argument("--premultiply", action="store_true")
    p.add_argument("--log-transform", action="store_true")
    p.add_argument("--slice-axis", type=int)
    p.add_argument("--slice-value", type=float, default=0.5)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_reconstruct)

    p = sub.add_parser("study", help="Convergence rate study")
    p.add_argument("--mesh", required=True)
    p.add_argument("--family", choices=families, default="legendre")
    p.add_argument("--s", type=int)
    p.add_argument("--n-list", required=True)
    p.add_argument("--test-fn", default="expsum")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_study)

    p = sub.add_parser("consistency", help="Point versus shrinking-ball encodings")
    p.add_argument("--point", required=True)
    p.add_argument("--radii", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--family", choices=families, default="legendre")
    p.add_argument("--test-fn", help="Optional field sampled as f")
    p.add_argument("--resolution", type=int, default=64)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_consistency)

    p = sub.add_parser("mc-study", help="Monte Carlo versus quadrature encodings")
    p.add_argument("--mesh", required=True)
    p.add_argument("--family", choices=families, default="legendre")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--N-list", dest="N_list", required=True)
    p.add_argument("--seeds", type=int, required=True)
    p.add_argument("--seed", type=int, default=0, help="First seed of the range")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_mc_study)

    p = sub.add_parser("locality", help="Pairing decay away from a joint manifold")
    p.add_argument("--n-list", default="8,16,32")
    p.add_argument("--family", choices=["legendre"], default="legendre")
    p.add_argument("--s", type=int, default=0, help="Sobolev order of the decoder")
    p.add_argument("--grid", type=int, default=128)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(handler=cmd_locality)

    p = sub.add_parser("gen-data", help="Generate an operator-learning dataset")
    p.add_argument("--problem", choices=sorted(PROBLEMS), default="poisson1d")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_gen_data)

    p = sub.add_parser("train", help="Train a MIONet on a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--preset", choices=sorted(PRESETS), default="desk")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--iterations", type=int, help="Override the preset's iteration count")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("evaluate", help="Mean relative L2 error of a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.set_defaults(handler=cmd_evaluate)

    p = sub.add_parser("validate", help="Print the validation report of a mesh")
    p.add_argument("--mesh", required=True)
    p.add_argument("--periodic", action="store_true")
    p.add_argument("--dim", type=int, help="Coordinate count of a headerless point cloud")
    p.set_defaults(handler=cmd_validate)

    p = sub.add_parser("cache", help="Gram cache maintenance")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--stats", action="store_true")
    group.add_argument("--clear", action="store_true")
    p.set_defaults(handler=cmd_cache)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = Settings.from_env()
        args.handler(args, settings)
    except MFEError as e:
        print(f"✗ {e}", file=sys.stderr)
        return e.exit_code
    except (ValidationError, ValueError) as e:
        print(f"✗ {e}", file=sys.stderr)
        return UsageError.exit_code
    except FileNotFoundError as e:
        print(f"✗ {e}", file=sys.stderr)
        return UsageError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
