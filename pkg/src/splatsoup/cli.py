"""Command-line front end.

Subcommands: encode, decode, propagate, sample, render, validate, bench.
Exit codes: 0 success, 2 I/O or file-format problems, 3 validation
problems, 4 non-finite numeric data. Thread count comes from --threads or
the SPLATSOUP_THREADS environment variable (all cores when unset).
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .bench import DEFAULT_FACE_COUNTS, DEFAULT_SOUP_SIZE, format_table, run_benchmark
from .errors import FormatError, NumericError, SplatSoupError, ValidationError
from .mesh import (
    DEFAULT_SAMPLE_COUNT,
    face_areas,
    load_mesh,
    sample_surface,
    validate_edit_pair,
)
from .nearest import build_index
from .propagate import propagate_soup
from .render import OrthoCamera, render, write_image
from .sceneio import load_scene, load_soup, save_scene, save_soup
from .sdf import load_sdf_scene
from .soup import decode_soup, encode_soup

EXIT_OK = 0
EXIT_IO = 2
EXIT_VALIDATION = 3
EXIT_NUMERIC = 4


def _vec3(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected x,y,z — got {text!r}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number in {text!r}")


def _size(text: str) -> tuple[int, int]:
    parts = text.lower().split("x")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected WIDTHxHEIGHT — got {text!r}")
    try:
        w, h = int(parts[0]), int(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad size {text!r}")
    if w <= 0 or h <= 0:
        raise argparse.ArgumentTypeError("size must be positive")
    return w, h


def _existing(path_str: str) -> Path:
    path = Path(path_str)
    if not path.exists():
        raise FileNotFoundError(f"input file not found: {path}")
    return path


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="splatsoup",
        description="Edit flat-Gaussian splat scenes by propagating mesh edits "
                    "through a triangle-soup proxy.",
    )
    parser.add_argument("--version", action="version", version=f"splatsoup {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="extra progress output")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads for spatial queries (default: all cores, "
                             "or SPLATSOUP_THREADS)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="scene file -> triangle soup")
    p.add_argument("scene", help="input scene (.ply)")
    p.add_argument("soup", help="output soup mesh (.obj or .ply)")
    p.add_argument("--sidecar", default=None, help="attribute sidecar path (default <stem>.attrs.tsv)")

    p = sub.add_parser("decode", help="triangle soup -> scene file")
    p.add_argument("soup", help="input soup mesh (.obj or .ply)")
    p.add_argument("scene", help="output scene (.ply)")
    p.add_argument("--sidecar", default=None)

    p = sub.add_parser("propagate", help="carry a mesh edit onto a soup")
    p.add_argument("soup", help="input soup mesh")
    p.add_argument("original", help="original mesh")
    p.add_argument("edited", help="edited mesh (same face topology)")
    p.add_argument("--out", default=None, help="output soup mesh path")
    p.add_argument("--scene-out", default=None, help="decode the result straight to a scene file")
    p.add_argument("--report", default=None, help="write the association table (TSV)")
    p.add_argument("--sidecar", default=None, help="input soup sidecar")

    p = sub.add_parser("sample", help="sample points uniformly over a mesh surface")
    p.add_argument("mesh")
    p.add_argument("--n", type=int, default=DEFAULT_SAMPLE_COUNT)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output TSV (x y z face_id nx ny nz)")

    p = sub.add_parser("render", help="orthographic preview of a scene")
    p.add_argument("scene")
    p.add_argument("image", help="output portable pixmap (.ppm)")
    p.add_argument("--size", type=_size, default=(512, 512), help="image size, e.g. 640x480")
    p.add_argument("--cam-pos", type=_vec3, default=None, help="camera position x,y,z")
    p.add_argument("--cam-target", type=_vec3, default=None, help="look-at target x,y,z")
    p.add_argument("--cam-up", type=_vec3, default=(0.0, 0.0, 1.0))
    p.add_argument("--view-size", type=float, default=None,
                   help="world units covered by the image width (default: fit scene)")
    p.add_argument("--background", type=_vec3, default=(0.0, 0.0, 0.0))

    p = sub.add_parser("validate", help="check any splatsoup file and print a summary")
    p.add_argument("input", help="scene .ply, mesh .obj/.ply, soup mesh, or .sdf scene")
    p.add_argument("--edited", default=None,
                   help="treat INPUT as the original mesh and validate the edit pair")
    p.add_argument("--sidecar", default=None, help="validate INPUT as a soup with this sidecar")

    p = sub.add_parser("bench", help="propagation time versus mesh resolution")
    p.add_argument("--soup-size", type=int, default=DEFAULT_SOUP_SIZE)
    p.add_argument("--faces", default=",".join(str(f) for f in DEFAULT_FACE_COUNTS),
                   help="comma-separated target face counts")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--out", default=None, help="also write the table as TSV")
    return parser


def cmd_encode(args) -> int:
    start = time.perf_counter()
    cloud, report = load_scene(_existing(args.scene))
    soup = encode_soup(cloud)
    save_soup(soup, args.soup, sidecar=args.sidecar)
    elapsed = time.perf_counter() - start
    print(f"encoded {len(cloud)} gaussians -> {len(soup)} triangles")
    if len(report):
        print(report.summary())
    print(f"Time [s]: {elapsed:.2f}")
    return EXIT_OK


def cmd_decode(args) -> int:
    start = time.perf_counter()
    soup = load_soup(_existing(args.soup), sidecar=args.sidecar)
    cloud = decode_soup(soup)
    save_scene(cloud, args.scene)
    elapsed = time.perf_counter() - start
    print(f"decoded {len(soup)} triangles -> {len(cloud)} gaussians")
    print(f"Time [s]: {elapsed:.2f}")
    return EXIT_OK


def cmd_propagate(args) -> int:
    if args.out is None and args.scene_out is None:
        print("error: propagate needs --out and/or --scene-out", file=sys.stderr)
        return EXIT_VALIDATION
    soup = load_soup(_existing(args.soup), sidecar=args.sidecar)
    original = load_mesh(_existing(args.original))
    edited = load_mesh(_existing(args.edited))
    validate_edit_pair(original, edited)

    start = time.perf_counter()
    index = build_index(original)
    out, report = propagate_soup(soup, original, edited, index, workers=args.threads)
    elapsed = time.perf_counter() - start

    if args.out is not None:
        save_soup(out, args.out)
    if args.scene_out is not None:
        save_scene(decode_soup(out), args.scene_out)
    if args.report is not None:
        report.write_table(args.report)
    print(f"propagated {len(out)} triangles over {original.num_faces} faces")
    print(report.summary())
    print(f"Time [s]: {elapsed:.2f}")
    return EXIT_OK


def cmd_sample(args) -> int:
    mesh = load_mesh(_existing(args.mesh))
    samples = sample_surface(mesh, args.n, seed=args.seed)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("x\ty\tz\tface_id\tnx\tny\tnz\n")
        for i in range(len(samples)):
            p = samples.points[i]
            nrm = samples.normals[i]
            fh.write(
                f"{p[0]:.17g}\t{p[1]:.17g}\t{p[2]:.17g}\t{int(samples.face_ids[i])}"
                f"\t{nrm[0]:.17g}\t{nrm[1]:.17g}\t{nrm[2]:.17g}\n"
            )
    print(f"sampled {len(samples)} points from {mesh.num_faces} faces -> {args.out}")
    return EXIT_OK


def cmd_render(args) -> int:
    cloud, _ = load_scene(_existing(args.scene))
    width, height = args.size
    if len(cloud):
        lo = cloud.centers.min(axis=0)
        hi = cloud.centers.max(axis=0)
        mid = 0.5 * (lo + hi)
        diag = float(np.linalg.norm(hi - lo))
    else:
        mid = np.zeros(3)
        diag = 0.0
    span = args.view_size if args.view_size is not None else max(diag * 1.2, 1.0)
    target = np.asarray(args.cam_target, dtype=float) if args.cam_target is not None else mid
    if args.cam_pos is not None:
        position = np.asarray(args.cam_pos, dtype=float)
    else:
        position = target + np.array([0.0, -max(diag, 1.0) * 2.0, 0.0])
    camera = OrthoCamera.look_at(
        position, target, up=args.cam_up,
        view_width=span, view_height=span * height / width,
        image_width=width, image_height=height,
    )
    image = render(cloud, camera, background=args.background)
    write_image(image, args.image)
    print(f"rendered {len(cloud)} gaussians at {width}x{height} -> {args.image}")
    return EXIT_OK


def cmd_validate(args) -> int:
    path = _existing(args.input)
    if args.edited is not None:
        original = load_mesh(path)
        edited = load_mesh(_existing(args.edited))
        validate_edit_pair(original, edited)
        print(f"edit pair valid: {original.num_faces} corresponding faces")
        return EXIT_OK
    if args.sidecar is not None:
        soup = load_soup(path, sidecar=args.sidecar)
        print(f"soup valid: {len(soup)} triangles with attributes")
        return EXIT_OK

    suffix = path.suffix.lower()
    if suffix == ".sdf":
        shape = load_sdf_scene(path)
        print(f"sdf scene valid: {type(shape).__name__.lower()}")
        return EXIT_OK
    if suffix == ".obj":
        return _validate_mesh_or_soup(path)
    if suffix == ".ply":
        head = path.read_bytes()[:4096]
        if b"element face" in head:
            return _validate_mesh_or_soup(path)
        cloud, report = load_scene(path)
        rest = 0 if cloud.colors_rest is None else cloud.colors_rest.shape[1]
        print(f"scene valid: {len(cloud)} gaussians, {rest} higher-order color coefficients")
        print(report.summary())
        return EXIT_OK
    raise FormatError(f"cannot infer file kind from extension {suffix!r}", path=path)


def _validate_mesh_or_soup(path: Path) -> int:
    from .sceneio import default_sidecar_path

    mesh = load_mesh(path)
    print(f"mesh valid: {mesh.num_vertices} vertices, {mesh.num_faces} faces, "
          f"total area {face_areas(mesh).sum():.6g}")
    sidecar = default_sidecar_path(path)
    if sidecar.exists():
        soup = load_soup(path, sidecar=sidecar)
        print(f"soup sidecar valid: {len(soup)} attribute records")
    return EXIT_OK


def cmd_bench(args) -> int:
    try:
        face_counts = [int(f) for f in args.faces.split(",") if f.strip()]
    except ValueError:
        print(f"error: bad face counts {args.faces!r}", file=sys.stderr)
        return EXIT_VALIDATION
    if not face_counts:
        print("error: no face counts given", file=sys.stderr)
        return EXIT_VALIDATION

    def progress(row):
        if args.verbose:
            print(f"  {row.faces} faces: {row.seconds:.2f} s", file=sys.stderr)

    rows = run_benchmark(
        soup_size=args.soup_size,
        face_counts=face_counts,
        seed=args.seed,
        repeats=args.repeats,
        workers=args.threads,
        progress=progress,
    )
    table = format_table(rows)
    print(f"soup size: {args.soup_size} triangles")
    print(table)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("vertices\tfaces\ttime_s\n")
            for r in rows:
                fh.write(f"{r.vertices}\t{r.faces}\t{r.seconds:.6f}\n")
    return EXIT_OK


_HANDLERS = {
    "encode": cmd_encode,
    "decode": cmd_decode,
    "propagate": cmd_propagate,
    "sample": cmd_sample,
    "render": cmd_render,
    "validate": cmd_validate,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except NumericError as exc:
        print(f"error (numeric): {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValidationError as exc:
        print(f"error (validation): {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except FormatError as exc:
        print(f"error (format): {exc}", file=sys.stderr)
        return EXIT_IO
    except SplatSoupError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error (I/O): {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
