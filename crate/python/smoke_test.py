#!/usr/bin/env python3
"""Smoke test for the majscale_py extension module.

Builds nothing itself: it locates the compiled cdylib under target/,
copies it next to a temp directory under the importable name, and checks
a handful of known answers end to end.

Run after `cargo build --release -p majscale-py`:

    python3 python/smoke_test.py
"""

import math
import pathlib
import shutil
import sys
import tempfile


def load_module():
    root = pathlib.Path(__file__).resolve().parent.parent
    candidates = [
        root / "target" / "release" / "libmajscale_py.so",
        root / "target" / "debug" / "libmajscale_py.so",
        root / "target" / "release" / "majscale_py.dll",
        root / "target" / "release" / "libmajscale_py.dylib",
    ]
    built = next((c for c in candidates if c.exists()), None)
    if built is None:
        sys.exit("build the extension first: cargo build --release -p majscale-py")
    tmp = pathlib.Path(tempfile.mkdtemp(prefix="majscale_py_"))
    suffix = ".so" if built.suffix in (".so", ".dylib") else ".pyd"
    shutil.copy(built, tmp / f"majscale_py{suffix}")
    sys.path.insert(0, str(tmp))
    import majscale_py

    return majscale_py


def main():
    m = load_module()

    # span{E11, E12}: ncrank 1, smallest shrunk subspace is all of C^2
    e11 = [[(1, 0), (0, 0)], [(0, 0), (0, 0)]]
    e12 = [[(0, 0), (1, 0)], [(0, 0), (0, 0)]]
    space = m.MatrixSpace([e11, e12])
    assert space.shape == (2, 2)
    assert space.ncrank() == 1
    assert space.decide(1) and not space.decide(2)
    k, r_star, l_basis, r_basis, method = space.shrunk_subspace()
    assert (k, r_star) == (1, 2), (k, r_star)
    assert len(r_basis) == 2 and len(l_basis) == 1
    assert l_basis[0] == ["0/1", "1/1"], l_basis

    # the Wong route agrees
    k2, c2, u_basis = space.shrunk_subspace_wong(seed=7)
    assert (k2, c2) == (1, 1) and len(u_basis) == 2

    # scaling at k = 1 succeeds with size >= (1-eps)^2
    scaled, size, _ = space.scale(1.0, eps=0.1)
    assert scaled and size >= 0.81 - 1e-9, size

    # witness violating (2, 0) has defect ~0 and dims summing to >= 3
    defect, lw, rw = space.witness(2, 0, eps=1e-6)
    assert defect <= 1e-6 and len(lw) + len(rw) >= 3

    # identity space: full rank
    ident = m.MatrixSpace([[[(1, 0), (0, 0)], [(0, 0), (1, 0)]]])
    assert ident.ncrank() == 2

    # KL projection: q = (4,4) onto ones has divergence 6 - 4 log 2
    p, dual, div = m.kl_project([4.0, 4.0], [1.0, 1.0])
    assert abs(div - (6.0 - 4.0 * math.log(2.0))) < 1e-10
    assert all(abs(x - 1.0) < 1e-9 for x in p)
    z, hdiv = m.halfspace_project([1.0], [1.0], 2.0)
    assert abs(z - math.log(2.0)) < 1e-9
    assert abs(hdiv - (2.0 * math.log(2.0) - 1.0)) < 1e-9

    # smallest Hall blocker of the 3x3 pattern with columns {0,1} on row 0
    cols, d = m.hall_blocker([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, 1.0]])
    assert (cols, d) == ([0, 1], 1), (cols, d)

    # one spanning line in C^2: matching optimum 1 at k = 2
    lines = [([1, 0], [0, 1])]
    x, value, k = m.matroid_matching(2, lines, eps=0.1)
    assert k == 2 and 0.9 <= value <= 1.0 + 1e-9, (k, value)
    k_star, s_basis, t_basis = m.two_cover(2, lines)
    assert k_star == 2 and len(s_basis) + len(t_basis) == 2

    # weighted optimum over two identical lines: OPT = 1 for w = (1,1)
    two = [([1, 0], [0, 1]), ([1, 0], [0, 1])]
    assert m.weighted_optimum(2, two, [1, 1]) == 1.0
    assert m.weighted_optimum(2, two, [3, 0]) == 3.0

    # membership: (0.45, 0.45) near, (0.6, 0.6) far
    near, y = m.bl_membership(2, two, [0.45, 0.45])
    assert near and y is not None and abs(y[0] - 0.45 * math.exp(-0.05)) < 1e-3
    far, _ = m.bl_membership(2, two, [0.6, 0.6])
    assert not far
    assert m.membership_exact_rational(2, two, [1, 1], 2)
    assert not m.membership_exact_rational(2, two, [1, 1], 1)

    print("smoke test passed")


if __name__ == "__main__":
    main()
