"""Independent high-precision reference values, frozen into tests/oracle_values.py.

Everything here uses mpmath directly from the defining formulas and never
imports omlab.  Run ``python3 scripts/oracles.py > tests/oracle_values.py``.
"""
import mpmath as mp

mp.mp.dps = 40


def besov_pdf(p):
    c = 1 / (2 * mp.gamma(1 + mp.mpf(1) / p))
    return lambda u: c * mp.exp(-abs(u) ** p)


def cauchy_pdf(u):
    return 1 / (mp.pi * (1 + u * u))


def cauchy_cdf(u):
    return mp.mpf(1) / 2 + mp.atan(u) / mp.pi


def fisher(pdf, dq, pts):
    return mp.quad(lambda u: dq(u) ** 2 * pdf(u), pts)


def hellinger(pdf, shift):
    return mp.quad(lambda u: mp.sqrt(pdf(u) * pdf(u - shift)), [-mp.inf, 0, shift, mp.inf])


def laplace_ball_2d(c, a, g, r):
    """Mass of {|y1-c1|/a1 + |y2-c2|/a2 < r} under independent Laplace(0, g_k) coordinates."""
    def F(x):
        return mp.mpf(1) / 2 * mp.exp(x) if x < 0 else 1 - mp.mpf(1) / 2 * mp.exp(-x)

    def inner(y1):
        rem = r - abs(y1 - c[0]) / a[0]
        lo, hi = (c[1] - a[1] * rem) / g[1], (c[1] + a[1] * rem) / g[1]
        return mp.exp(-abs(y1) / g[0]) / (2 * g[0]) * (F(hi) - F(lo))

    pts = sorted({c[0] - a[0] * r, mp.mpf(0), mp.mpf(c[0]), c[0] + a[0] * r})
    pts = [x for x in pts if c[0] - a[0] * r <= x <= c[0] + a[0] * r]
    return mp.quad(inner, pts)


def main():
    R = [mp.mpf(1) / 2, mp.mpf(1) / 4, mp.mpf(1) / 8, mp.mpf(1) / 16]
    out = {}
    out["BESOV2_PDF0"] = 1 / mp.sqrt(mp.pi)
    out["ERF1"] = mp.erf(1)
    out["LOG17"] = mp.log(17)
    out["FISHER_CAUCHY"] = fisher(cauchy_pdf, lambda u: 2 * u / (1 + u * u), [-mp.inf, 0, mp.inf])
    out["FISHER_BESOV2"] = fisher(besov_pdf(2), lambda u: 2 * u, [-mp.inf, 0, mp.inf])
    p = mp.mpf(3) / 2
    out["FISHER_BESOV15"] = fisher(besov_pdf(p), lambda u: p * mp.sign(u) * abs(u) ** (p - 1), [-mp.inf, 0, mp.inf])
    out["HELLINGER_CAUCHY_2"] = hellinger(cauchy_pdf, 2)
    out["HELLINGER_BESOV1_1"] = hellinger(besov_pdf(1), 1)
    out["HELLINGER_BESOV2_2"] = hellinger(besov_pdf(2), 2)
    out["KAKUTANI_GEOMETRIC"] = mp.exp(-mp.mpf(1) / 12)
    out["ZETA2_PARTIAL_100"] = mp.fsum(mp.mpf(1) / k**2 for k in range(1, 101))
    out["CAUCHY_RATIO_R"] = [(cauchy_cdf(1 + r) - cauchy_cdf(1 - r)) / (cauchy_cdf(r) - cauchy_cdf(-r)) for r in R]
    # Besov p = 1, s = 1.5: gamma_k = 1/k, metric weights delta_k = k (ell^1_delta ball)
    g, a = (mp.mpf(1), mp.mpf(1) / 2), (mp.mpf(1), mp.mpf(2))
    out["BESOV1_RATIO_R"] = [laplace_ball_2d((mp.mpf(1) / 2, 0), a, g, r) / laplace_ball_2d((0, 0), a, g, r)
                             for r in R]
    out["BESOV1_BALL_R"] = [laplace_ball_2d((0, 0), a, g, r) for r in R]
    out["CAUCHY_BOX_A"] = [mp.sqrt(mp.exp(t) - 1) for t in (mp.mpf(1) / 2, mp.log(2), mp.mpf(4))]
    print('"""Reference values frozen from scripts/oracles.py (mpmath, 40 digits)."""')
    for k, v in out.items():
        if isinstance(v, list):
            print(f"{k} = [" + ", ".join(mp.nstr(x, 17) for x in v) + "]")
        else:
            print(f"{k} = {mp.nstr(v, 17)}")


if __name__ == "__main__":
    main()
