"""Independent reference values frozen into the test-suite.

Run with ``python tests/oracles/frozen_values.py``; nothing here imports
specflag.  Exact values come from sympy/mpmath, curve values from the
textbook iterative Hilbert-curve conversion and the polar form of the
concentric square-to-disk map.
"""
import math

import mpmath
import sympy as sp

mpmath.mp.dps = 30


def d2xy(order, d):
    """Cell of index d on the Hilbert curve of side 2^order (starts (0,0), ends (side-1,0))."""
    side = 1 << order
    x = y = 0
    s = 1
    t = d
    while s < side:
        rx = 1 & (t // 2)
        ry = 1 & (t ^ rx)
        if ry == 0:
            if rx == 1:
                x, y = s - 1 - x, s - 1 - y
            x, y = y, x
        x += s * rx
        y += s * ry
        t //= 4
        s *= 2
    return x, y


def xy2d(order, x, y):
    side = 1 << order
    d = 0
    s = side // 2
    while s > 0:
        rx = 1 if (x & s) > 0 else 0
        ry = 1 if (y & s) > 0 else 0
        d += s * s * ((3 * rx) ^ ry)
        if ry == 0:
            if rx == 1:
                x, y = side - 1 - x, side - 1 - y
            x, y = y, x
        s //= 2
    return d


def concentric_inverse(z):
    """Square point (in [0,1]^2) whose concentric image is z (|z| <= 1)."""
    r = abs(z)
    phi = math.atan2(z.imag, z.real)
    if phi < -math.pi / 4:
        phi += 2 * math.pi
    if phi < math.pi / 4:
        a, b = r, r * phi / (math.pi / 4)
    elif phi < 3 * math.pi / 4:
        a, b = -r * (phi - math.pi / 2) / (math.pi / 4), r
    elif phi < 5 * math.pi / 4:
        a, b = -r, -r * (phi - math.pi) / (math.pi / 4)
    else:
        a, b = r * (phi - 3 * math.pi / 2) / (math.pi / 4), -r
    return (a + 1) / 2, (b + 1) / 2


def main():
    print("sin(0.3) =", mpmath.sin(mpmath.mpf("0.3")))
    a = sp.Matrix([[2, 1], [0, 3]])
    e = a.exp()
    print("exp([[2,1],[0,3]]) =", [[sp.N(v, 20) for v in row] for row in e.tolist()])
    print("exp(diag(1,2)) =", sp.N(sp.E, 20), sp.N(sp.E ** 2, 20))
    m = sp.Matrix([[0, 1], [0, 5]])
    print("eigenvects [[0,1],[0,5]] =", m.eigenvects())
    print("eigenvects adjoint =", m.H.eigenvects())
    p = sp.Matrix([[1, 1], [0, 2]])
    print("A^2 =", (p * p).tolist(), " A^2 - 2A + 2 =", (p * p - 2 * p + 2 * sp.eye(2)).tolist())
    print("z1^2 + z2 on (A, A^2) =", (p * p + p * p).tolist())
    print("hilbert depth 2 cells =", [d2xy(2, d) for d in range(16)])
    print("hilbert depth 3 cells 0..63 checksum =",
          sum((i + 1) * (x * 8 + y) for i, (x, y) in enumerate(d2xy(3, d) for d in range(64))))
    for z in (0.3 + 0.4j, -0.5 + 0.1j, 0.0):
        sx, sy = concentric_inverse(complex(z))
        cell = (min(7, int(sx * 8)), min(7, int(sy * 8)))
        print(f"atom {z}: square {sx!r}, {sy!r}; depth-3 cell {cell}; index {xy2d(3, *cell)}")


if __name__ == "__main__":
    main()
