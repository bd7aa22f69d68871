import mpmath as mp
import pytest

mp.mp.dps = 30


def bvn_oracle(h: float, k: float, r: float) -> float:
    """P[X <= h, Y <= k] at correlation r by adaptive mpmath quadrature.

    The conditional cdf has a sharp step near x = k / r when |r| is close to 1,
    so the integration range is split there.
    """
    h, k, r = mp.mpf(h), mp.mpf(k), mp.mpf(r)
    if abs(r) < mp.mpf("1e-6"):
        # nearly independent: first-order expansion in r is exact to ~1e-12
        return float(mp.ncdf(h) * mp.ncdf(k) + r * mp.npdf(h) * mp.npdf(k))
    s = mp.sqrt(1 - r * r)
    c = k / r
    breaks = sorted({p for p in (c - 20 * s / abs(r), c, c + 20 * s / abs(r)) if p < h})
    return float(mp.quad(lambda x: mp.npdf(x) * mp.ncdf((k - r * x) / s), [-mp.inf, *breaks, h]))


def normal_quantile_oracle(p: float) -> float:
    p = mp.mpf(p)
    if p < mp.mpf("1e-10"):
        # erfinv loses precision next to -1; solve ncdf(x) = p directly
        guess = -mp.sqrt(-2 * mp.log(p))
        return float(mp.findroot(lambda x: mp.log(mp.ncdf(x)) - mp.log(p), guess))
    return float(mp.sqrt(2) * mp.erfinv(2 * p - 1))


@pytest.fixture
def bvn():
    return bvn_oracle
