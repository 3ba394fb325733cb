"""Exercises the Python bindings end to end on small phantoms.

Build and install first:
    maturin build --release -m crates/py/Cargo.toml -o target/wheels
    pip install target/wheels/skinseg_py-*.whl
"""

import json
import math
import os
import sys
import tempfile

import skinseg_py as sk


def check(cond, what):
    if not cond:
        print("FAIL", what)
        sys.exit(1)
    print("ok  ", what)


def main():
    vol = sk.sphere_phantom(32, 10.0)
    check(vol.dims == [32, 32, 32] and len(vol) == 32**3, "sphere phantom dims")
    check(vol.min_max() == (0.0, 1.0), "phantom intensity range")

    norm = sk.normalize_intensities(sk.Volume([2, 1, 1], [3.0, 5.0]))
    check(norm.data() == [0.0, 1.0], "normalize")
    check(sk.pad_volume(vol, 2).dims == [36, 36, 36], "pad")
    check(sk.subsample(vol, [2, 2, 2]).dims == [16, 16, 16], "subsample")
    check(max(sk.gradient_magnitude(vol).data()) == 1.0, "gradient renormalized")

    seg = sk.segment_volume(vol)
    check(seg.strategy == "fixed" and seg.isovalue == 0.1, "fixed default isovalue")
    check(seg.grid.dims == [34, 34, 34] and not seg.warnings, "padded grid")
    grad = sk.segment_volume(vol, sk.SegmentationConfig(strategy="gradient"))
    check(grad.isovalue == 0.01 and grad.gradient_preprocessed, "gradient default isovalue")

    mesh = sk.extract_surface(seg.grid)
    check(sk.is_watertight(mesh) and mesh.signed_volume() > 0, "watertight outward mesh")
    c = 31 * 0.5
    worst = max(abs(math.dist(v, (c, c, c)) - 10.0) for v in mesh.vertices)
    check(worst <= math.sqrt(3), f"vertices near the sphere (max error {worst:.3f})")

    bigger = sk.extract_surface(sk.segment_volume(sk.sphere_phantom(32, 13.0)).grid)
    rep = sk.directed_hausdorff(bigger, mesh)
    sym = sk.symmetric_hausdorff(mesh, bigger)
    check(abs(sym - 3.0) <= 2 * math.sqrt(3), f"concentric hausdorff {sym:.3f}")
    check(rep.mean <= rep.hausdorff and len(rep.per_vertex) == bigger.vertex_count(), "report fields")
    check(sk.directed_hausdorff(mesh, mesh).hausdorff == 0.0, "self distance")

    spec = {
        "kind": "body_with_bed",
        "body_center": [15.5, 12.0, 15.5],
        "body_radii": [10.0, 7.0, 12.0],
        "bed_min": [2.5, 22.5, 1.5],
        "bed_max": [28.5, 25.5, 29.5],
        "dims": [32, 32, 32],
        "spacing": [1.0, 1.0, 1.0],
        "body_intensity": 1.0,
        "background_intensity": 0.0,
        "noise_amplitude": 0.05,
    }
    bed_vol, truth = sk.generate_phantom(json.dumps(spec), seed=7)
    check(json.loads(truth)["kind"] == "union", "bed truth is a union")
    bed = sk.extract_surface(sk.segment_volume(bed_vol).grid)
    lo, hi = bed.bounding_box()
    check(hi[1] >= 25.5, "bed kept in the mesh")
    body = bed.crop([-100, -100, -100], [100, 20, 100])
    check(0 < body.vertex_count() < bed.vertex_count(), "crop removes the bed")

    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "m.ply")
        mesh.save(path)
        back = sk.TriangleMesh.load(path)
        check(back.triangles == mesh.triangles, "ply round trip")
        vol.save(os.path.join(d, "v.json"))
        check(sk.Volume.load(os.path.join(d, "v.raw")).data() == vol.data(), "rawvol round trip")
        rep.export(os.path.join(d, "d.csv"))
        with open(os.path.join(d, "d.json")) as f:
            check(json.load(f)["hausdorff_mm"] == rep.hausdorff, "exported summary")

    try:
        sk.segment_volume(sk.Volume([2, 2, 2], [1.0] * 8))
        check(False, "constant volume raises")
    except sk.SkinsegError:
        check(True, "constant volume raises")
    try:
        sk.Volume.load("/no/such/file.json")
        check(False, "missing file raises")
    except OSError:
        check(True, "missing file raises OSError")

    print("smoke test passed")


if __name__ == "__main__":
    main()
