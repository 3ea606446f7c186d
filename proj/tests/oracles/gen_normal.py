#!/usr/bin/env python3
"""Frozen normal-tail oracle values.

Tails are computed twice at 50 digits, by adaptive quadrature of the normal
density and by erfc, and must agree to 30 digits before being written.
"""
import sys
from mpmath import mp, mpf, quad, exp, sqrt, pi, erfc, log, inf

mp.dps = 50


def density(t):
    return exp(-t * t / 2) / sqrt(2 * pi)


def tail(w):
    w = mpf(w)
    if w > 0:
        # t = w + s; the factor exp(-w^2/2) is pulled out of the integrand.
        h = 1 / max(w, mpf(1))
        q = exp(-w * w / 2) / sqrt(2 * pi) * quad(lambda s: exp(-w * s - s * s / 2),
                                                  [0, h, 4 * h, 16 * h, 64 * h, inf])
    else:
        q = 1 - quad(density, [-inf, w - 4, w - 1, w])
    e = erfc(w / sqrt(2)) / 2
    assert abs(q - e) <= mpf(10) ** -30 * e, (w, q, e)
    return e


def main(out):
    pts = []
    # 200 points: dense on [-10, 10], then the deep tail up to 37.5.
    for i in range(140):
        pts.append(mpf(-10) + mpf(20) * i / 139)
    for i in range(60):
        pts.append(mpf(10) + mpf("27.5") * (i + 1) / 60)
    with open(out, "w") as f:
        f.write("// Generated by gen_normal.py; do not edit.\n")
        f.write("// {w, 1 - Phi(w), log(1 - Phi(w))}\n")
        f.write("static const NormalOracleRow kNormalTailOracle[] = {\n")
        for w in pts:
            t = tail(w)
            f.write("    {%s, %s, %s},\n" % (mp.nstr(w, 20), mp.nstr(t, 20), mp.nstr(log(t), 20)))
        f.write("};\n\n")
        # Log tails beyond the normal-double range of 1 - Phi.
        f.write("static const NormalOracleRow kDeepLogTailOracle[] = {\n")
        for w in [38, 39, 40, 45, 50, 60, 80, 100]:
            t = erfc(mpf(w) / sqrt(2)) / 2
            f.write("    {%s, 0.0, %s},\n" % (mp.nstr(mpf(w), 20), mp.nstr(log(t), 20)))
        f.write("};\n\n")
        # Stein solution reference values.
        s2p = sqrt(2 * pi)
        f00 = s2p * tail(0) * (1 - tail(0))
        g10 = (s2p * tail(0)) * tail(1)
        br5 = s2p * (1 + 25) * exp(mpf(25) / 2) * tail(5) - 5
        f.write("static const double kSteinF00 = %s;\n" % mp.nstr(f00, 20))
        f.write("static const double kSteinG10 = %s;\n" % mp.nstr(g10, 20))
        f.write("static const double kBracketAt5 = %s;\n" % mp.nstr(br5, 20))
        f.write("static const double kTailAt2 = %s;\n" % mp.nstr(tail(2), 20))
        f.write("static const double kTailAt1 = %s;\n" % mp.nstr(tail(1), 20))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "normal_oracle.inc")
