"""Period-4 height-periodic boundary laws of the SOS model on a Cayley tree.

A law is the bi-infinite sequence u_n = 1 (n even), b (n = 1 mod 4),
a (n = 3 mod 4), so u_{-1} = a and u_1 = b.  With tau = theta + 1/theta
the laws are the positive solutions of

    (a + b - tau) b^k + tau b - 2 = 0
    (a + b - tau) a^k + tau a - 2 = 0.

Everything here runs in a private mpmath context (``mp``, 40 digits).  The
asymmetric branch at large k sits where a + b - tau is ~1e-4 and a^k is
~1e5, so double precision cannot hold a law accurately enough for the
verification oracles; scans run in floats, polishing and checking do not.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, NamedTuple, Optional

import mpmath
import numpy as np
from scipy.optimize import minimize_scalar

from .polynomial import Polynomial

__all__ = [
    "mp", "Params", "PeriodicBoundaryLaw", "Root", "SeriesSums", "IdentityCheck",
    "Residuals", "Tolerances", "LawRecord", "InvalidParameters", "OracleFailure",
    "symmetric_polynomial", "full_symmetric_polynomial", "solve_symmetric",
    "critical_tau", "critical_tau_closed_form", "solve_asymmetric",
    "extend_periodic", "recursion_residual", "series_sums", "norm_identity_residual",
    "fixed_point_residual", "verify_law", "enumerate_laws", "ab_residual",
]

mp = mpmath.MPContext()
mp.dps = 40

ROOT_TOL = 1e-12
TANGENCY_TOL = 1e-9
DOUBLE_ROOT_TOL = 1e-7
# pairs this close to a = b are merged into the symmetric branch; genuine
# ones occur only within ~1e-12 of a bifurcation tau, where the system is
# degenerate to fourth order and Newton cannot separate them anyway
DIAGONAL_TOL = 1e-6
_NEWTON_CONVERGED = mp.mpf(10) ** (15 - mp.dps)


class InvalidParameters(ValueError):
    pass


class OracleFailure(RuntimeError):
    """A solver returned a law that fails one of the verification oracles."""


def to_mp(x) -> Any:
    if isinstance(x, str):
        return mp.mpf(x.strip())
    return mp.mpf(x)


@dataclass(frozen=True)
class Params:
    """Branching order k and transfer parameter theta in (0, 1).

    Build with :meth:`from_theta`, :meth:`from_tau` or :meth:`from_coupling`;
    whichever of theta/tau is supplied is kept exactly and the other is
    derived at working precision.
    """

    k: int
    theta: Any
    tau: Any
    coupling: Optional[tuple[float, float]] = field(default=None, compare=False)

    @staticmethod
    def _check_k(k) -> int:
        if isinstance(k, bool) or int(k) != k or k < 2:
            raise InvalidParameters(f"k must be an integer >= 2, got {k!r}")
        return int(k)

    @classmethod
    def from_theta(cls, k, theta) -> "Params":
        k = cls._check_k(k)
        th = to_mp(theta)
        if not 0 < th < 1:
            raise InvalidParameters(f"theta must lie in (0, 1), got {theta!r}")
        return cls(k, th, th + 1 / th)

    @classmethod
    def from_tau(cls, k, tau) -> "Params":
        k = cls._check_k(k)
        t = to_mp(tau)
        if not t > 2:
            raise InvalidParameters(f"tau must exceed 2, got {tau!r}")
        # smaller root of theta^2 - tau theta + 1, written without cancellation
        th = 2 / (t + mp.sqrt(t * t - 4))
        return cls(k, th, t)

    @classmethod
    def from_coupling(cls, k, J: float, beta: float) -> "Params":
        p = cls.from_theta(k, mp.exp(to_mp(J) * to_mp(beta)))
        return cls(p.k, p.theta, p.tau, (float(J), float(beta)))

    def __str__(self) -> str:
        return f"Params(k={self.k}, theta={mp.nstr(self.theta, 12)}, tau={mp.nstr(self.tau, 12)})"


@dataclass(frozen=True)
class PeriodicBoundaryLaw:
    a: Any
    b: Any

    def __post_init__(self):
        a, b = to_mp(self.a), to_mp(self.b)
        if not (a > 0 and b > 0):
            raise ValueError(f"law entries must be positive, got a={self.a!r}, b={self.b!r}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def family(self) -> str:
        if self.a == self.b:
            return "trivial" if self.a == 1 else "symmetric"
        return "asymmetric"

    def u(self, n: int):
        r = n % 4
        if r == 1:
            return self.b
        if r == 3:
            return self.a
        return mp.mpf(1)

    def is_valid(self, params: Params) -> bool:
        return bool(self.a + self.b < params.tau)

    def swapped(self) -> "PeriodicBoundaryLaw":
        return PeriodicBoundaryLaw(self.b, self.a)


def extend_periodic(a, b) -> PeriodicBoundaryLaw:
    return PeriodicBoundaryLaw(a, b)


class Root(NamedTuple):
    value: Any
    multiplicity: int


# ---------------------------------------------------------------------------
# symmetric family a = b


def symmetric_polynomial(params: Params) -> Polynomial:
    """2a^k + (2 - tau)(a^{k-1} + ... + a) + 2, highest degree first."""
    c = 2 - params.tau
    return Polynomial((mp.mpf(2),) + (c,) * (params.k - 1) + (mp.mpf(2),))


def full_symmetric_polynomial(params: Params) -> Polynomial:
    """2a^{k+1} - tau a^k + tau a - 2 = (a - 1) * symmetric_polynomial."""
    zero = mp.mpf(0)
    return Polynomial((mp.mpf(2), -params.tau) + (zero,) * (params.k - 2)
                      + (params.tau, mp.mpf(-2)))


def _bisect(f, lo, hi, maxiter: int = 400):
    lo, hi = mp.mpf(lo), mp.mpf(hi)
    flo = f(lo)
    if flo == 0:
        return lo
    for _ in range(maxiter):
        mid = (lo + hi) / 2
        if hi - lo <= 4 * mp.eps * mid:
            break
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return (lo + hi) / 2


def _scan_grid(Q: Polynomial, n: int) -> np.ndarray:
    # every root of Q has |a| >= c_0 / (c_0 + max|c_i|) (Cauchy bound on 1/a)
    cs = [abs(float(c)) for c in Q.coeffs]
    lower = cs[-1] / (cs[-1] + max(cs[:-1]))
    return np.geomspace(lower / 2, 1.0, n)


def solve_symmetric(params: Params, tangency_tol: float = TANGENCY_TOL) -> list[Root]:
    """Distinct positive roots of 2a^{k+1} - tau a^k + tau a - 2, ascending.

    a = 1 is always present.  Roots of the reduced polynomial Q are isolated
    by a sign scan on (0, 1], bisected, and mirrored through a -> 1/a (Q is
    palindromic).  When |tau - tau_c| <= ``tangency_tol`` the tangent pair has
    merged into a = 1, which is then reported once with multiplicity 3.
    """
    k = params.k
    Q = symmetric_polynomial(params)
    one = mp.mpf(1)
    if abs(Q(one)) / (k - 1) <= tangency_tol:
        return [Root(one, 3)]

    xs = _scan_grid(Q, 64 + 32 * k)
    vals = [Q.eval_compensated(x) for x in xs]
    dQ = Q.derivative()
    scale = Q.scale
    small = []
    for x0, x1, v0, v1 in zip(xs[:-1], xs[1:], vals[:-1], vals[1:]):
        if v0 == 0 or (v0 > 0) != (v1 > 0):
            r = _bisect(Q, x0, x1)
            if r < 1:
                small.append(r)
    out = [Root(one, 1)]
    for r in small:
        mult = 2 if abs(dQ(r)) < DOUBLE_ROOT_TOL * scale else 1
        out.append(Root(r, mult))
        out.append(Root(1 / r, mult))
    out.sort(key=lambda root: root.value)
    return out


def critical_tau_closed_form(k: int) -> float:
    return 2.0 + 4.0 / (k - 1)


def _min_Q(k: int, tau: float) -> float:
    Q = Polynomial((2.0,) + (2.0 - tau,) * (k - 1) + (2.0,))
    res = minimize_scalar(Q.eval_compensated, bounds=(1e-9, 4.0), method="bounded",
                          options={"xatol": 1e-12})
    return float(res.fun)


def critical_tau(k: int, tol: float = 1e-9) -> float:
    """tau at which min_{a>0} Q(a) = 0, by bisection on tau.

    The tangent root is forced onto a = 1 by palindromy, giving the closed
    form 2 + 4/(k-1); the two are required to agree to ``tol``.
    """
    Params._check_k(k)
    lo, hi = 2.0, 4.0
    while _min_Q(k, hi) >= 0:
        lo, hi = hi, 2 * hi
    while hi - lo > 1e-14 * hi:
        mid = 0.5 * (lo + hi)
        if _min_Q(k, mid) > 0:
            lo = mid
        else:
            hi = mid
    t = 0.5 * (lo + hi)
    closed = critical_tau_closed_form(k)
    if abs(t - closed) > tol:
        raise OracleFailure(f"tangency tau {t!r} disagrees with 2 + 4/(k-1) = {closed!r}")
    return t


# ---------------------------------------------------------------------------
# asymmetric family a != b


def ab_residual(a, b, params: Params):
    """Both equations of the period-4 system, evaluated at working precision."""
    a, b, tau, k = to_mp(a), to_mp(b), params.tau, params.k
    c = a + b - tau
    return c * b ** k + tau * b - 2, c * a ** k + tau * a - 2


def _ratio_for(b: np.ndarray, k: int, tau: float) -> np.ndarray:
    # unique x in (0, 1) with (tau b - 2)(x + ... + x^{k-1}) = 2, valid for b > b*
    g = tau * b - 2.0
    lo = np.zeros_like(b)
    hi = np.ones_like(b)
    for _ in range(62):
        mid = 0.5 * (lo + hi)
        s = np.zeros_like(b)
        for _ in range(k - 1):
            s = (s + 1.0) * mid
        up = g * s > 2.0
        hi = np.where(up, mid, hi)
        lo = np.where(up, lo, mid)
    return 0.5 * (lo + hi)


def _profile(b: np.ndarray, k: int, tau: float) -> np.ndarray:
    x = _ratio_for(b, k, tau)
    # second equation divided by b^k, with a = x b
    return (x + 1.0) * b - tau + (tau * b - 2.0) / b ** k


def _newton_ab(a0: float, b0: float, params: Params, maxiter: int = 60):
    """Damped Newton on the full system; also reports whether it converged quadratically."""
    k, tau = params.k, params.tau
    a, b = mp.mpf(a0), mp.mpf(b0)

    def norm(f):
        return max(abs(f[0]), abs(f[1]))

    f = ab_residual(a, b, params)
    step = mp.inf
    for _ in range(maxiter):
        c = a + b - tau
        bk, ak = b ** k, a ** k
        j11, j12 = bk, bk + k * c * b ** (k - 1) + tau
        j21, j22 = ak + k * c * a ** (k - 1) + tau, ak
        det = j11 * j22 - j12 * j21
        if det == 0:
            break
        da = (f[0] * j22 - j12 * f[1]) / det
        db = (j11 * f[1] - j21 * f[0]) / det
        lam = mp.mpf(1)
        while lam > 1e-8:
            na, nb = a - lam * da, b - lam * db
            if na > 0 and nb > 0:
                nf = ab_residual(na, nb, params)
                if norm(nf) < norm(f):
                    break
            lam /= 2
        else:
            break
        step = max(abs(na - a), abs(nb - b))
        a, b, f = na, nb, nf
        if step <= 8 * mp.eps * max(a, b):
            break
    # a linear crawl onto a multiple root leaves steps far above this
    converged = norm(f) <= _NEWTON_CONVERGED and step <= 1e-20 * max(a, b)
    return a, b, norm(f), converged


def solve_asymmetric(params: Params, n_grid: int = 3000) -> list[tuple[Any, Any]]:
    """All positive solutions (a, b) with a != b of the period-4 system.

    Eliminating between the two equations leaves, with x = a/b,
    (tau b - 2)(x + ... + x^{k-1}) = 2, which fixes a unique x(b) for each
    b > 2/tau.  Every solution has a + b < tau, and every unordered pair has
    exactly one member with x < 1, i.e. b > b* = 2k / ((k-1) tau).  So it
    suffices to scan b over (b*, tau), refine each sign change of the
    remaining equation, polish with damped Newton on the full system, and
    add the swapped pairs.
    """
    k = params.k
    tau_f = float(params.tau)
    bstar = 2.0 * k / ((k - 1) * tau_f)
    if bstar >= tau_f:
        return []
    t = np.concatenate([np.geomspace(1e-12, 1e-2, 240, endpoint=False),
                        np.linspace(1e-2, 1.0, n_grid)])
    bs = bstar + (tau_f - bstar) * t
    gs = _profile(bs, k, tau_f)

    found: list[tuple[Any, Any]] = []
    for i in np.nonzero(np.sign(gs[:-1]) * np.sign(gs[1:]) <= 0)[0]:
        lo, hi = bs[i], bs[i + 1]
        glo = gs[i]
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid in (lo, hi):
                break
            gm = _profile(np.array([mid]), k, tau_f)[0]
            if (gm > 0) == (glo > 0):
                lo, glo = mid, gm
            else:
                hi = mid
        b0 = 0.5 * (lo + hi)
        a0 = float(_ratio_for(np.array([b0]), k, tau_f)[0]) * b0
        a, b, res, converged = _newton_ab(a0, b0, params)
        # simple roots polish to working precision in a few steps; a stall or
        # linear crawl means the seed sat on the degenerate point a = b
        if not converged or res > _NEWTON_CONVERGED or not (a > 0 and b > 0):
            continue
        if abs(a - b) <= DIAGONAL_TOL * max(a, b):
            continue
        for pair in ((a, b), (b, a)):
            if not any(abs(pair[0] - q[0]) + abs(pair[1] - q[1]) <= 1e-20 * (1 + q[0] + q[1])
                       for q in found):
                found.append(pair)
    found.sort(key=lambda p: (p[0], p[1]))
    return found


# ---------------------------------------------------------------------------
# verification oracles


def recursion_residual(law: PeriodicBoundaryLaw, params: Params, N: int = 100) -> float:
    """Largest one-step defect of the two-sided recursion over |i| <= N.

    For each i in 1..N the period-4 extension supplies u_{i-1}, u_i and the
    forward step c u_i^k + tau u_i - u_{i-1} (c = a + b - tau) is compared
    with u_{i+1}; likewise the mirrored step towards negative indices.
    Iterating the map from two seed values instead would amplify rounding
    by a factor of order tau per step.
    """
    if N < 4:
        raise ValueError("N must be at least 4")
    k, tau = params.k, params.tau
    c = law.a + law.b - tau
    u = law.u
    worst = mp.mpf(0)
    for i in range(1, N + 1):
        fwd = c * u(i) ** k + tau * u(i) - u(i - 1)
        bwd = c * u(-i) ** k + tau * u(-i) - u(-i + 1)
        worst = max(worst, abs(fwd - u(i + 1)), abs(bwd - u(-i - 1)))
    return float(worst)


@dataclass(frozen=True)
class SeriesSums:
    l0: Any
    r0: Any
    direct_gap: float = 0.0

    @property
    def finite(self) -> bool:
        return bool(mp.isfinite(self.l0) and mp.isfinite(self.r0))


def _closed_series(law: PeriodicBoundaryLaw, params: Params):
    th, k = params.theta, params.k
    A, B = law.a ** k, law.b ** k
    den = 1 - th ** 4
    r0 = (B * th + th ** 2 + A * th ** 3 + th ** 4) / den
    l0 = (A * th + th ** 2 + B * th ** 3 + th ** 4) / den
    return l0, r0


def _direct_series(law: PeriodicBoundaryLaw, params: Params, tail: float = 1e-14):
    th, k = params.theta, params.k
    zmax = max(law.a ** k, law.b ** k, 1)
    l0 = r0 = mp.mpf(0)
    p = mp.mpf(1)
    j = 0
    while True:
        j += 1
        p *= th
        r0 += p * law.u(j) ** k
        l0 += p * law.u(-j) ** k
        if p * th * zmax / (1 - th) < tail:
            return l0, r0


def series_sums(law: PeriodicBoundaryLaw, params: Params, tol: float = 1e-12) -> SeriesSums:
    """l_0 = sum_{j<0} theta^|j| z_j and r_0 = sum_{j>0} theta^j z_j, z = u^k.

    Closed forms group the geometric series by residue class mod 4; a
    truncated direct sum is run alongside and must agree to ``tol``.
    """
    l0, r0 = _closed_series(law, params)
    dl, dr = _direct_series(law, params)
    gap = float(max(abs(l0 - dl), abs(r0 - dr)))
    if gap > tol:
        raise OracleFailure(f"closed-form and direct series sums differ by {gap:.3e}")
    return SeriesSums(l0, r0, gap)


class IdentityCheck(NamedTuple):
    lhs: Any
    rhs: Any
    residual: Optional[float]
    status: str  # "ok" | "sign_contradiction" | "singular"

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def norm_identity_residual(law: PeriodicBoundaryLaw, params: Params) -> IdentityCheck:
    """Compare 1 + l_0 + r_0 with (theta - 1/theta) / (a + b - tau).

    The left side is positive and theta - 1/theta < 0, so a law with
    a + b >= tau cannot satisfy the identity; that case is reported through
    ``status`` rather than as a residual.
    """
    th = params.theta
    l0, r0 = _closed_series(law, params)
    lhs = 1 + l0 + r0
    den = law.a + law.b - params.tau
    if abs(den) <= 16 * mp.eps * params.tau:
        return IdentityCheck(lhs, None, None, "singular")
    rhs = (th - 1 / th) / den
    if den > 0:
        return IdentityCheck(lhs, rhs, None, "sign_contradiction")
    return IdentityCheck(lhs, rhs, float(abs(lhs - rhs)), "ok")


def fixed_point_residual(law: PeriodicBoundaryLaw, params: Params) -> float:
    """max over i in {-2,-1,1,2} of |z_i - RHS_i| for the compatibility equation.

    RHS_i = (sum_j theta^|i-j| z_j / sum_j theta^|j| z_j)^k with z = u^k and
    z_0 = 1; the bi-infinite sums are closed by residue class mod 4.  This
    uses nothing from the recursion form of the equation.
    """
    th, k = params.theta, params.k
    den = 1 - th ** 4
    T = (1 + 2 * th ** 4 / den, (th + th ** 3) / den, 2 * th ** 2 / den, (th + th ** 3) / den)
    z = (mp.mpf(1), law.b ** k, mp.mpf(1), law.a ** k)

    def conv(i):
        return sum(T[d] * z[(i + d) % 4] for d in range(4))

    n0 = conv(0)
    return float(max(abs(z[i % 4] - (conv(i) / n0) ** k) for i in (-2, -1, 1, 2)))


@dataclass(frozen=True)
class Residuals:
    recursion: float
    fixed_point: float
    norm_identity: Optional[float]
    identity_status: str

    def as_dict(self) -> dict:
        return {"recursion": self.recursion, "fixed_point": self.fixed_point,
                "norm_identity": self.norm_identity}


@dataclass(frozen=True)
class Tolerances:
    recursion: float = 1e-9
    fixed_point: float = 1e-10
    norm_identity: float = 1e-10

    def failures(self, res: Residuals) -> list[str]:
        bad = []
        if not res.recursion < self.recursion:
            bad.append("recursion")
        if not res.fixed_point < self.fixed_point:
            bad.append("fixed_point")
        if res.norm_identity is None or not res.norm_identity < self.norm_identity:
            bad.append("norm_identity")
        return bad

    def passes(self, res: Residuals) -> bool:
        return not self.failures(res)


def verify_law(law: PeriodicBoundaryLaw, params: Params, N: int = 100) -> Residuals:
    ident = norm_identity_residual(law, params)
    return Residuals(recursion_residual(law, params, N),
                     fixed_point_residual(law, params),
                     ident.residual, ident.status)


@dataclass(frozen=True)
class LawRecord:
    params: Params
    law: PeriodicBoundaryLaw
    multiplicity: int
    valid: bool
    residuals: Residuals


def enumerate_laws(params: Params, tolerances: Tolerances = Tolerances(),
                   check: bool = True) -> list[LawRecord]:
    """Every period-4 law at ``params``: symmetric family first, then asymmetric.

    With ``check`` set, a returned law failing any oracle raises
    :class:`OracleFailure`; that is a solver defect, not a data point.
    """
    laws = [(extend_periodic(r.value, r.value), r.multiplicity) for r in solve_symmetric(params)]
    laws += [(extend_periodic(a, b), 1) for a, b in solve_asymmetric(params)]
    out = []
    for law, mult in laws:
        res = verify_law(law, params)
        if check:
            bad = tolerances.failures(res)
            if bad:
                raise OracleFailure(
                    f"{law.family} law a={mp.nstr(law.a, 15)} b={mp.nstr(law.b, 15)} at "
                    f"{params} fails {', '.join(bad)}: {res}")
        out.append(LawRecord(params, law, mult, law.is_valid(params), res))
    return out
