"""Command line pipeline: spectrum -> descriptor -> match -> evaluate, plus parameter sweeps."""

from __future__ import annotations

import argparse
import itertools
import logging
import re
import sys
import warnings
from pathlib import Path

import numpy as np

from . import _accel
from .config import RunConfig, env_workers, load_config, parse_pairs
from .correspondence import Matching, match, read_matching_csv, write_matching_csv
from .descriptor import (
    DescriptorSet,
    compute_all,
    load_descriptors,
    save_descriptors,
    write_csv,
    write_curve_csv,
)
from .errors import FormatError, InputError, MeshError, NumericalError
from .evaluation import evaluate, identity_truth, read_truth, summary_line, write_report
from .integrators import make_grid, model_from_name, scheme_from_name
from .laplacian import assemble
from .mesh import TriangleMesh, compute_areas, load_mesh
from .spectrum import SpectralBasis, load_cache, save_cache, solve_reduced

log = logging.getLogger("shapecorr")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

SWEEP_SCHEMES = ("implicit-euler", "crank-nicolson", "twizell")
SWEEP_CS = (1.0, 5.0, 10.0)
TOSCA_ANIMALS = ("cat", "centaur", "dog", "horse", "wolf")


# ---------------------------------------------------------------------------
# sidecars


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".cfg")


def write_sidecar(path, config: RunConfig, **meta) -> None:
    extra = "".join(f"meta.{k}={v}\n" for k, v in meta.items())
    sidecar_path(path).write_text(config.to_text() + extra)


def read_sidecar_meta(path) -> dict[str, str]:
    p = sidecar_path(path)
    if not p.exists():
        return {}
    pairs = parse_pairs(p.read_text(), str(p))
    return {k[5:]: v for k, v in pairs.items() if k.startswith("meta.")}


_UPSTREAM_KEYS = ("model", "scheme", "r", "m0", "c", "t_m", "epsilon", "psi", "lambda_max", "mesh", "cache_dir")


def inherit_upstream(config: RunConfig, upstream) -> RunConfig:
    """Copy model parameters recorded in an input's sidecar so outputs stay self-describing."""
    p = sidecar_path(upstream)
    if not p.exists():
        return config
    up = load_config(p)
    return config.updated({k: getattr(up, k) for k in _UPSTREAM_KEYS})


# ---------------------------------------------------------------------------
# pipeline stages


def spectrum_cache_path(config: RunConfig, mesh_path=None) -> Path:
    mesh_path = Path(mesh_path or config.mesh)
    return Path(config.cache_dir) / f"{mesh_path.stem}.r{config.r}.scrb"


def ensure_spectrum(config: RunConfig, mesh: TriangleMesh, mesh_path) -> tuple[SpectralBasis, Path]:
    """Load the cached basis when its content hash matches, otherwise solve and write it."""
    cache = spectrum_cache_path(config, mesh_path)
    key = mesh.content_hash()
    lam_override = "" if config.lambda_max is None else repr(config.lambda_max)
    meta = read_sidecar_meta(cache)
    if cache.exists() and meta.get("mesh_hash") == key and meta.get("r") == str(config.r) \
            and meta.get("lambda_max") == lam_override:
        log.info("loaded cached spectrum %s", cache)
        return load_cache(cache), cache
    if config.r >= mesh.n_vertices:
        raise InputError(f"r={config.r} must be smaller than the vertex count N={mesh.n_vertices}")
    areas = compute_areas(mesh)
    op = assemble(mesh, areas)
    log.info("solving %d eigenpairs for %s (N=%d)", config.r, mesh.name, mesh.n_vertices)
    basis = solve_reduced(op, config.r, lambda_max_abs=config.lambda_max)
    cache.parent.mkdir(parents=True, exist_ok=True)
    save_cache(basis, cache)
    write_sidecar(cache, config, mesh_hash=key, r=config.r, lambda_max=lam_override, mesh=mesh_path)
    log.info("wrote spectrum cache %s", cache)
    return basis, cache


def cmd_spectrum(config: RunConfig) -> Path:
    config.validate()
    mesh = load_mesh(config.mesh)
    if config.r >= mesh.n_vertices:
        raise InputError(f"r={config.r} must be smaller than the vertex count N={mesh.n_vertices}")
    return ensure_spectrum(config, mesh, config.mesh)[1]


def _load_basis_for(config: RunConfig, mesh: TriangleMesh, mesh_path) -> SpectralBasis:
    cache = spectrum_cache_path(config, mesh_path)
    if not cache.exists():
        raise InputError(f"no spectrum cache {cache}; run 'shapecorr spectrum' first")
    meta = read_sidecar_meta(cache)
    if meta.get("mesh_hash") != mesh.content_hash():
        raise InputError(f"spectrum cache {cache} does not match mesh {mesh_path} (content hash differs)")
    return load_cache(cache)


def descriptor_set_for(config: RunConfig, basis: SpectralBasis, name: str) -> DescriptorSet:
    model = model_from_name(config.model, config.psi)
    scheme = scheme_from_name(config.scheme, config.epsilon)
    grid = make_grid(model, basis.lambda_max_abs, abs(basis.eigenvalues[-1]),
                     t_M=config.t_m, m0=config.m0, c=config.c)
    return compute_all(basis, model, grid, scheme, name=name, workers=config.workers)


def default_descriptor_path(config: RunConfig, mesh_path) -> Path:
    stem = Path(mesh_path).stem
    return Path(config.cache_dir) / f"{stem}.{config.model}.{config.scheme}.c{config.c:g}.sdsc"


def cmd_descriptor(config: RunConfig, *, csv: str | None = None, curve_vertex: int | None = None) -> Path:
    config.validate()
    mesh = load_mesh(config.mesh)
    basis = _load_basis_for(config, mesh, config.mesh)
    ds = descriptor_set_for(config, basis, mesh.name)
    out = Path(config.out) if config.out else default_descriptor_path(config, config.mesh)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_descriptors(ds, out)
    write_sidecar(out, config, mesh_hash=mesh.content_hash(), tau=repr(ds.tau), M=ds.M,
                  t_star=repr(ds.metadata["t_star"]))
    log.info("wrote %d descriptors with %d samples each to %s", ds.N, ds.M + 1, out)
    if csv:
        write_csv(ds, csv, header=config.as_comment())
    if curve_vertex is not None:
        curve = out.with_name(f"{out.stem}.curve{curve_vertex}.csv")
        write_curve_csv(ds, curve_vertex, curve, header=config.as_comment())
        log.info("wrote descriptor curve of vertex %d to %s", curve_vertex, curve)
    return out


def cmd_match(config: RunConfig) -> Path:
    config.validate()
    if not (config.query and config.target):
        raise InputError("match needs --query and --target descriptor files")
    config = inherit_upstream(config, config.query)
    q = load_descriptors(config.query)
    t = load_descriptors(config.target)
    m = match(q, t, workers=config.workers)
    out = Path(config.out or "matching.csv")
    write_matching_csv(m, out, header=config.as_comment())
    write_sidecar(out, config, backend=_accel.backend())
    log.info("matched %d query vertices against %d targets -> %s", q.N, t.N, out)
    return out


def cmd_evaluate(config: RunConfig) -> str:
    config.validate()
    if not (config.matching and config.target_mesh):
        raise InputError("evaluate needs --matching and --target-mesh")
    config = inherit_upstream(config, config.matching)
    m = read_matching_csv(config.matching)
    mesh = load_mesh(config.target_mesh)
    areas = compute_areas(mesh)
    truth = _truth(config, len(m))
    report = evaluate(m, truth, mesh, areas, config.threshold)
    stem = config.out or str(Path(config.matching).with_suffix(""))
    paths = write_report(report, stem, header=config.as_comment())
    for p in paths:
        write_sidecar(p, config)
    line = summary_line(report)
    log.info("%s", line)
    return line


def _truth(config: RunConfig, n: int) -> np.ndarray:
    if not config.truth or config.truth == "identity":
        return identity_truth(n)
    return read_truth(config.truth, n)


# ---------------------------------------------------------------------------
# sweep


def discover_tosca(root, classes) -> dict[str, list[Path]]:
    """Map class name to its pose files ``<class><k>.vert`` sorted by pose number."""
    root = Path(root)
    out = {}
    for cls in classes:
        pat = re.compile(rf"^{re.escape(cls)}(\d+)\.vert$")
        poses = sorted((int(m.group(1)), p) for p in root.iterdir() if (m := pat.match(p.name)))
        if not poses:
            raise InputError(f"no poses for class {cls!r} in {root}")
        out[cls] = [p for _, p in poses]
    return out


def run_sweep(config: RunConfig, groups: dict[str, list[Path]], *, schemes=SWEEP_SCHEMES, cs=SWEEP_CS,
              query_stride: int = 1) -> list[dict]:
    """Mean hit rate over ordered intra-group pairs for every (scheme, c); identity ground truth."""
    config.validate()
    meshes = {}
    bases = {}
    for cls, paths in groups.items():
        if len(paths) < 2:
            raise InputError(f"class {cls!r} needs at least two poses, got {len(paths)}")
        for p in paths:
            mesh = load_mesh(p)
            meshes[p] = (mesh, compute_areas(mesh))
            bases[p] = ensure_spectrum(config, mesh, p)[0]
    rows = []
    for scheme, c in itertools.product(schemes, cs):
        cfg = config.updated({"scheme": scheme, "c": float(c)}).validate()
        descs = {p: descriptor_set_for(cfg, bases[p], meshes[p][0].name) for p in bases}
        class_rates = {}
        for cls, paths in groups.items():
            rates = []
            for a, b in itertools.permutations(paths, 2):
                qa, tb = descs[a], descs[b]
                if qa.N != tb.N:
                    raise InputError(f"{a.name} and {b.name} do not share vertex indexing")
                rows_idx = np.arange(0, qa.N, query_stride)
                sub = DescriptorSet(qa.samples[rows_idx], qa.tau, qa.model, qa.scheme, qa.name)
                m_sub = match(sub, tb, workers=cfg.workers)
                full = Matching(np.zeros(qa.N, dtype=np.int64), np.zeros(qa.N))
                full.matches[rows_idx] = m_sub.matches
                full.distances[rows_idx] = m_sub.distances
                tmesh, tareas = meshes[b]
                rep = evaluate(full, identity_truth(qa.N), tmesh, tareas, cfg.threshold, query_indices=rows_idx)
                rates.append(rep.hit_rate_percent)
                log.info("%s %s c=%g %s->%s hit=%.2f%%", cfg.model, scheme, c, a.stem, b.stem, rep.hit_rate_percent)
            class_rates[cls] = float(np.mean(rates))
        M = next(iter(descs.values())).M
        rows.append({
            "model": cfg.model, "scheme": scheme, "c": float(c), "M": M,
            "mean_hit_rate": float(np.mean(list(class_rates.values()))),
            **{f"hit_rate_{cls}": v for cls, v in class_rates.items()},
        })
    return rows


def write_sweep_csv(rows: list[dict], path, header: str = "") -> None:
    keys = list(rows[0].keys())
    with open(path, "w") as fh:
        fh.write(header + ",".join(keys) + "\n")
        for row in rows:
            fh.write(",".join(f"{row[k]:.6g}" if isinstance(row[k], float) else str(row[k]) for k in keys) + "\n")


def cmd_sweep(config: RunConfig, *, meshes=(), tosca_dir=None, classes=TOSCA_ANIMALS,
              schemes=SWEEP_SCHEMES, cs=SWEEP_CS, query_stride: int = 1) -> Path:
    if tosca_dir:
        groups = discover_tosca(tosca_dir, classes)
    elif meshes:
        groups = {"meshes": [Path(p) for p in meshes]}
    else:
        raise InputError("sweep needs --tosca-dir or at least two --mesh arguments")
    if query_stride < 1:
        raise InputError(f"query stride must be positive, got {query_stride}")
    rows = run_sweep(config, groups, schemes=schemes, cs=cs, query_stride=query_stride)
    out = Path(config.out or f"sweep_{config.model}.csv")
    write_sweep_csv(rows, out, header=config.as_comment())
    write_sidecar(out, config, query_stride=query_stride, schemes=",".join(schemes),
                  cs=",".join(f"{c:g}" for c in cs), groups=";".join(
                      f"{k}:{','.join(str(p) for p in v)}" for k, v in groups.items()))
    log.info("wrote %d sweep rows to %s", len(rows), out)
    return out


# ---------------------------------------------------------------------------
# argument parsing


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--workers", type=int)
    p.add_argument("--cache-dir")
    p.add_argument("--out")
    p.add_argument("-v", "--verbose", action="store_true")


def _model_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", choices=("heat", "wave", "dampedwave"))
    p.add_argument("--scheme", choices=("implicit-euler", "crank-nicolson", "explicit-euler", "twizell"))
    p.add_argument("--psi", type=float)
    p.add_argument("--c", type=float)
    p.add_argument("--m0", type=int)
    p.add_argument("--tm", dest="t_m", type=float)
    p.add_argument("--epsilon", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shapecorr", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="solve and cache the reduced eigenbasis of a mesh")
    _common(p)
    p.add_argument("--mesh", required=True)
    p.add_argument("--r", type=int)
    p.add_argument("--lambda-max", type=float, help="override the Gershgorin estimate of |lambda_N|")

    p = sub.add_parser("descriptor", help="compute feature descriptors for every vertex")
    _common(p)
    _model_opts(p)
    p.add_argument("--mesh", required=True)
    p.add_argument("--r", type=int)
    p.add_argument("--csv", help="also write all descriptors as CSV")
    p.add_argument("--emit-curve", type=int, metavar="VERTEX", help="write (t, f) CSV for one vertex")

    p = sub.add_parser("match", help="nearest-neighbour matching of two descriptor files")
    _common(p)
    p.add_argument("--query", required=True)
    p.add_argument("--target", required=True)

    p = sub.add_parser("evaluate", help="geodesic error and hit rate of a matching")
    _common(p)
    p.add_argument("--matching", required=True)
    p.add_argument("--target-mesh", required=True)
    p.add_argument("--truth", help="ground-truth file (one target index per line) or 'identity'")
    p.add_argument("--threshold", type=float)

    p = sub.add_parser("sweep", help="hit-rate table over schemes x time-step scaling")
    _common(p)
    _model_opts(p)
    p.add_argument("--r", type=int)
    p.add_argument("--mesh", action="append", default=[], help="pose of one class (repeatable)")
    p.add_argument("--tosca-dir")
    p.add_argument("--classes", default=",".join(TOSCA_ANIMALS))
    p.add_argument("--schemes", default=",".join(SWEEP_SCHEMES))
    p.add_argument("--cs", default=",".join(f"{c:g}" for c in SWEEP_CS))
    p.add_argument("--threshold", type=float)
    p.add_argument("--query-stride", type=int, default=1, help="score every k-th query vertex")
    return parser


_CONFIG_KEYS = ("model", "scheme", "psi", "c", "m0", "t_m", "epsilon", "r", "lambda_max", "threshold",
                "cache_dir", "out", "query", "target", "matching", "target_mesh", "truth")


def config_from_args(args: argparse.Namespace) -> RunConfig:
    config = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    values = {}
    env = env_workers()
    if env is not None:
        values["workers"] = env
    if args.workers is not None:
        values["workers"] = args.workers
    for key in _CONFIG_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    if args.command in ("spectrum", "descriptor"):
        values["mesh"] = args.mesh
    return config.updated(values).validate()


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    # numba falls back to another threading layer on its own; the notice is noise here
    warnings.filterwarnings("ignore", message="The TBB threading layer")
    try:
        config = config_from_args(args)
        if args.command == "spectrum":
            print(cmd_spectrum(config))
        elif args.command == "descriptor":
            print(cmd_descriptor(config, csv=args.csv, curve_vertex=args.emit_curve))
        elif args.command == "match":
            print(cmd_match(config))
        elif args.command == "evaluate":
            print(cmd_evaluate(config))
        elif args.command == "sweep":
            try:
                cs = tuple(float(x) for x in args.cs.split(","))
            except ValueError:
                raise InputError(f"--cs must be a comma-separated list of numbers, got {args.cs!r}") from None
            print(cmd_sweep(config, meshes=args.mesh, tosca_dir=args.tosca_dir,
                            classes=tuple(args.classes.split(",")), schemes=tuple(args.schemes.split(",")),
                            cs=cs, query_stride=args.query_stride))
    except (InputError, MeshError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    except NumericalError as exc:
        log.error("%s", exc)
        return EXIT_NUMERICAL
    except (OSError, FormatError) as exc:
        log.error("%s", exc)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
