"""
Edit-time scaling with mesh resolution
======================================

How long does one full edit propagation take as the guide mesh gets
denser? The soup size stays fixed (the scene does not change); only the
mesh resolution grows. Association cost is dominated by building the
nearest-centroid index, so time grows gently -- close to n log n in the
face count -- while the per-triangle transform work is constant.

This demo runs a reduced sweep; the full-size sweep (120k to 3.3M faces
against a 100k-triangle soup) is `splatsoup bench` or the acceptance
suite's benchmark criterion.
"""

from splatsoup.bench import format_table, run_benchmark

rows = run_benchmark(
    soup_size=20_000,
    face_counts=(20_000, 80_000, 320_000, 1_280_000),
    seed=0,
)
print("soup size: 20000 triangles")
print(format_table(rows))

per_face = [r.seconds / r.faces * 1e6 for r in rows]
print("\nmicroseconds per mesh face:",
      ", ".join(f"{v:.2f}" for v in per_face))
print("times should grow with face count but far slower than linearly "
      "in the soup, whose size never changed.")
