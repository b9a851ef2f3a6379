"""Achievable-rate algebra and WMMSE sum-rate precoder optimization.

Rates follow the per-scheme table: the common stream must be decodable by
both receivers (min over them), privates are decoded after perfect SIC of the
common stream, and absent streams contribute zero. The optimizer alternates
MMSE equalizers, MSE weights and a precoder update; the common stream's
min-rate term is handled exactly inside the precoder subproblem by splitting
the common weight across the two receivers (bisected so the binding receiver
is correct), which keeps the true objective non-decreasing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from numba import njit

from .channel import CsitEstimate

__all__ = [
    "SchemeKind",
    "PrecoderSet",
    "RateBreakdown",
    "CommonSplit",
    "WmmseOptions",
    "WmmseResult",
    "rate_common_at_rx",
    "rate_private",
    "rate_breakdown",
    "wmmse_optimize",
    "wmmse_multistart",
    "nominal_mcs_sum_rate",
]


class SchemeKind(str, Enum):
    RSMA = "rsma"
    SDMA = "sdma"
    NOMA = "noma"


@dataclass
class PrecoderSet:
    """Precoder columns for the streams a scheme actually transmits.

    p_1/p_2 are the private precoders of RX1/RX2. For NOMA exactly one
    private stream exists: RX1's unless the solver swapped the user roles
    because RX2 reported the stronger channel.
    """

    scheme: SchemeKind
    p_c: np.ndarray | None
    p_1: np.ndarray | None
    p_2: np.ndarray | None
    power_budget: float
    noma_swapped: bool = False

    def __post_init__(self):
        for name in ("p_c", "p_1", "p_2"):
            v = getattr(self, name)
            if v is not None:
                setattr(self, name, np.asarray(v, dtype=np.complex128).reshape(2))
        if self.scheme == SchemeKind.RSMA:
            ok = self.p_c is not None and self.p_1 is not None and self.p_2 is not None
        elif self.scheme == SchemeKind.SDMA:
            ok = self.p_c is None and self.p_1 is not None and self.p_2 is not None
        else:
            ok = self.p_c is not None and (
                (self.p_1 is None) != (self.p_2 is None))
        if not ok:
            raise ValueError(f"stream presence inconsistent with {self.scheme}")
        if self.total_power() > self.power_budget + 1e-9:
            raise ValueError("precoders exceed the power budget")

    def columns(self) -> dict:
        return {k: v for k, v in
                (("common", self.p_c), ("private1", self.p_1), ("private2", self.p_2))
                if v is not None}

    def private(self, rx: int) -> np.ndarray | None:
        return self.p_1 if rx == 0 else self.p_2

    def total_power(self) -> float:
        return sum(float(np.vdot(v, v).real) for v in self.columns().values())

    def to_json(self) -> str:
        def enc(v):
            return None if v is None else [[float(x.real), float(x.imag)] for x in v]
        return json.dumps({"scheme": self.scheme.value,
                           "p_c": enc(self.p_c), "p_1": enc(self.p_1),
                           "p_2": enc(self.p_2),
                           "power_budget": self.power_budget,
                           "noma_swapped": self.noma_swapped})

    @classmethod
    def from_json(cls, text: str) -> "PrecoderSet":
        doc = json.loads(text)

        def dec(v):
            return None if v is None else np.array([complex(r, i) for r, i in v])
        return cls(scheme=SchemeKind(doc["scheme"]), p_c=dec(doc["p_c"]),
                   p_1=dec(doc["p_1"]), p_2=dec(doc["p_2"]),
                   power_budget=doc["power_budget"],
                   noma_swapped=doc.get("noma_swapped", False))


@dataclass(frozen=True)
class CommonSplit:
    """Fraction of the common message belonging to each receiver."""

    fraction_rx1: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.fraction_rx1 <= 1.0:
            raise ValueError("fraction must lie in [0, 1]")

    @property
    def fraction_rx2(self) -> float:
        return 1.0 - self.fraction_rx1

    def fraction(self, rx: int) -> float:
        return self.fraction_rx1 if rx == 0 else self.fraction_rx2


@dataclass(frozen=True)
class RateBreakdown:
    r_common_at_rx: tuple[float, float]
    r_common: float
    r_private: tuple[float, float]
    sum_rate: float
    per_rx_rate: tuple[float, float]


@dataclass(frozen=True)
class WmmseOptions:
    max_iters: int = 500
    tol: float = 1e-8
    init: object = "mrt-zf"   # "mrt-zf" | "random" | PrecoderSet warm start
    seed: int = 0

    def __post_init__(self):
        if self.max_iters < 1 or self.tol <= 0:
            raise ValueError("need max_iters >= 1 and tol > 0")


@dataclass
class WmmseResult:
    pset: PrecoderSet
    objective_bits: float
    trajectory: np.ndarray
    n_iters: int
    converged: bool


def _as_rows(h) -> np.ndarray:
    h = np.asarray(h, dtype=np.complex128)
    return h.reshape(1, 2) if h.ndim == 1 else h.reshape(-1, 2)


def _private_interference(pset: PrecoderSet, rx: int) -> list[np.ndarray]:
    other = pset.private(1 - rx)
    return [other] if other is not None else []


def rate_common_at_rx(h, pset: PrecoderSet, sigma2: float) -> float:
    """Common-stream rate at one receiver: worst subcarrier of
    log2(1 + |h^H p_c|^2 / (sigma2 + sum of private-stream powers))."""
    if pset.p_c is None:
        raise ValueError("scheme has no common stream")
    if sigma2 <= 0:
        raise ValueError("sigma2 must be > 0")
    rows = _as_rows(h)
    sig = np.abs(rows.conj() @ pset.p_c) ** 2
    den = np.full(rows.shape[0], sigma2)
    for p in (pset.p_1, pset.p_2):
        if p is not None:
            den = den + np.abs(rows.conj() @ p) ** 2
    return float(np.min(np.log2(1.0 + sig / den)))


def rate_private(h, pset: PrecoderSet, sigma2: float, rx: int) -> float:
    """Private-stream rate of RX rx after perfect common-stream SIC; the other
    private stream (when present) is treated as noise. Zero if absent."""
    if sigma2 <= 0:
        raise ValueError("sigma2 must be > 0")
    own = pset.private(rx)
    if own is None:
        return 0.0
    rows = _as_rows(h)
    sig = np.abs(rows.conj() @ own) ** 2
    den = np.full(rows.shape[0], sigma2)
    for p in _private_interference(pset, rx):
        den = den + np.abs(rows.conj() @ p) ** 2
    return float(np.min(np.log2(1.0 + sig / den)))


def rate_breakdown(h1, h2, pset: PrecoderSet, sigma2: float,
                   split: CommonSplit = CommonSplit()) -> RateBreakdown:
    if pset.p_c is not None:
        rc1 = rate_common_at_rx(h1, pset, sigma2)
        rc2 = rate_common_at_rx(h2, pset, sigma2)
        rc = min(rc1, rc2)
    else:
        rc1 = rc2 = rc = 0.0
    r1 = rate_private(h1, pset, sigma2, 0)
    r2 = rate_private(h2, pset, sigma2, 1)
    per_rx = (r1 + split.fraction(0) * rc, r2 + split.fraction(1) * rc)
    return RateBreakdown(r_common_at_rx=(rc1, rc2), r_common=rc,
                         r_private=(r1, r2), sum_rate=rc + r1 + r2,
                         per_rx_rate=per_rx)


def nominal_mcs_sum_rate(mcs_selection, scheme: SchemeKind) -> float:
    """Sum of m*r over the scheme's streams, no decode probabilities."""
    total = 0.0
    for level in (mcs_selection.common, mcs_selection.private1, mcs_selection.private2):
        if level is not None:
            total += level.rate_bits_per_symbol
    return total


# ---------------------------------------------------------------------------
# WMMSE kernel. Scheme codes: 0 = RSMA, 1 = SDMA, 2 = NOMA (user 1 strong).

_LN2 = float(np.log(2.0))


@njit(cache=True)
def _wmmse_kernel(h1, h2, sigma2, pt, scheme, p_init, max_iters, tol):
    has_c = scheme != 1
    has_p2 = scheme != 2

    pc = p_init[:, 0].copy()
    p1 = p_init[:, 1].copy()
    p2 = p_init[:, 2].copy()
    if not has_c:
        pc[:] = 0.0
    if not has_p2:
        p2[:] = 0.0

    traj = np.empty(max_iters + 1, np.float64)

    # --- true objective in bits (singleton subcarrier) ---------------------
    def _obj(pc, p1, p2):
        yc1 = np.conj(h1[0]) * pc[0] + np.conj(h1[1]) * pc[1]
        yc2 = np.conj(h2[0]) * pc[0] + np.conj(h2[1]) * pc[1]
        y11 = np.conj(h1[0]) * p1[0] + np.conj(h1[1]) * p1[1]
        y12 = np.conj(h1[0]) * p2[0] + np.conj(h1[1]) * p2[1]
        y21 = np.conj(h2[0]) * p1[0] + np.conj(h2[1]) * p1[1]
        y22 = np.conj(h2[0]) * p2[0] + np.conj(h2[1]) * p2[1]
        sc1 = abs(yc1) ** 2
        sc2 = abs(yc2) ** 2
        s11 = abs(y11) ** 2
        s12 = abs(y12) ** 2
        s21 = abs(y21) ** 2
        s22 = abs(y22) ** 2
        total = 0.0
        if has_c:
            rc1 = np.log2(1.0 + sc1 / (sigma2 + s11 + s12))
            rc2 = np.log2(1.0 + sc2 / (sigma2 + s21 + s22))
            total += min(rc1, rc2)
        if has_p2:
            total += np.log2(1.0 + s11 / (sigma2 + s12))
            total += np.log2(1.0 + s22 / (sigma2 + s21))
        else:
            total += np.log2(1.0 + s11 / sigma2)
        return total

    obj = _obj(pc, p1, p2)
    traj[0] = obj
    it_done = 0
    converged = False

    for it in range(1, max_iters + 1):
        # ---- MMSE equalizers and weights at the current precoders ---------
        yc1 = np.conj(h1[0]) * pc[0] + np.conj(h1[1]) * pc[1]
        yc2 = np.conj(h2[0]) * pc[0] + np.conj(h2[1]) * pc[1]
        y11 = np.conj(h1[0]) * p1[0] + np.conj(h1[1]) * p1[1]
        y12 = np.conj(h1[0]) * p2[0] + np.conj(h1[1]) * p2[1]
        y21 = np.conj(h2[0]) * p1[0] + np.conj(h2[1]) * p1[1]
        y22 = np.conj(h2[0]) * p2[0] + np.conj(h2[1]) * p2[1]

        tc1 = abs(yc1) ** 2 + abs(y11) ** 2 + abs(y12) ** 2 + sigma2
        tc2 = abs(yc2) ** 2 + abs(y21) ** 2 + abs(y22) ** 2 + sigma2
        gc1 = np.conj(yc1) / tc1
        gc2 = np.conj(yc2) / tc2
        ec1 = 1.0 - abs(yc1) ** 2 / tc1
        ec2 = 1.0 - abs(yc2) ** 2 / tc2
        wc1 = 1.0 / ec1
        wc2 = 1.0 / ec2

        if has_p2:
            tp1 = abs(y11) ** 2 + abs(y12) ** 2 + sigma2
            tp2 = abs(y22) ** 2 + abs(y21) ** 2 + sigma2
        else:
            tp1 = abs(y11) ** 2 + sigma2
            tp2 = 1.0
        gp1 = np.conj(y11) / tp1
        gp2 = np.conj(y22) / tp2
        ep1 = 1.0 - abs(y11) ** 2 / tp1
        ep2 = 1.0 - abs(y22) ** 2 / tp2
        wp1 = 1.0 / ep1
        wp2 = 1.0 / ep2

        # ---- surrogate value helper (frozen g, w) --------------------------
        def _phi(qc, q1, q2):
            zc1 = np.conj(h1[0]) * qc[0] + np.conj(h1[1]) * qc[1]
            zc2 = np.conj(h2[0]) * qc[0] + np.conj(h2[1]) * qc[1]
            z11 = np.conj(h1[0]) * q1[0] + np.conj(h1[1]) * q1[1]
            z12 = np.conj(h1[0]) * q2[0] + np.conj(h1[1]) * q2[1]
            z21 = np.conj(h2[0]) * q1[0] + np.conj(h2[1]) * q1[1]
            z22 = np.conj(h2[0]) * q2[0] + np.conj(h2[1]) * q2[1]
            val = 0.0
            if has_c:
                t1 = abs(zc1) ** 2 + abs(z11) ** 2 + abs(z12) ** 2 + sigma2
                t2 = abs(zc2) ** 2 + abs(z21) ** 2 + abs(z22) ** 2 + sigma2
                e1 = abs(gc1) ** 2 * t1 - 2.0 * (gc1 * zc1).real + 1.0
                e2 = abs(gc2) ** 2 * t2 - 2.0 * (gc2 * zc2).real + 1.0
                f1 = np.log(wc1) - wc1 * e1 + 1.0
                f2 = np.log(wc2) - wc2 * e2 + 1.0
                val += min(f1, f2)
            if has_p2:
                t1 = abs(z11) ** 2 + abs(z12) ** 2 + sigma2
                t2 = abs(z22) ** 2 + abs(z21) ** 2 + sigma2
                e1 = abs(gp1) ** 2 * t1 - 2.0 * (gp1 * z11).real + 1.0
                e2 = abs(gp2) ** 2 * t2 - 2.0 * (gp2 * z22).real + 1.0
                val += np.log(wp1) - wp1 * e1 + 1.0
                val += np.log(wp2) - wp2 * e2 + 1.0
            else:
                t1 = abs(z11) ** 2 + sigma2
                e1 = abs(gp1) ** 2 * t1 - 2.0 * (gp1 * z11).real + 1.0
                val += np.log(wp1) - wp1 * e1 + 1.0
            return val

        # ---- precoder subproblem for a given common weight split ----------
        def _solve(lam):
            # quadratic coefficients a_i (on h_i h_i^H) per stream
            qc1 = lam * wc1 * abs(gc1) ** 2 if has_c else 0.0
            qc2 = (1.0 - lam) * wc2 * abs(gc2) ** 2 if has_c else 0.0
            qp1 = wp1 * abs(gp1) ** 2
            qp2 = wp2 * abs(gp2) ** 2 if has_p2 else 0.0

            # A = a1 h1 h1^H + a2 h2 h2^H, per stream
            ac_1 = qc1
            ac_2 = qc2
            a1_1 = qc1 + qp1
            a1_2 = qc2 + (qp2 if has_p2 else 0.0)
            a2_1 = qc1 + qp1
            a2_2 = qc2 + qp2

            bc0 = lam * wc1 * np.conj(gc1) * h1[0] + (1.0 - lam) * wc2 * np.conj(gc2) * h2[0]
            bc1 = lam * wc1 * np.conj(gc1) * h1[1] + (1.0 - lam) * wc2 * np.conj(gc2) * h2[1]
            b10 = wp1 * np.conj(gp1) * h1[0]
            b11 = wp1 * np.conj(gp1) * h1[1]
            b20 = wp2 * np.conj(gp2) * h2[0]
            b21 = wp2 * np.conj(gp2) * h2[1]
            if not has_c:
                bc0 = 0.0j
                bc1 = 0.0j
            if not has_p2:
                b20 = 0.0j
                b21 = 0.0j

            btot = (abs(bc0) ** 2 + abs(bc1) ** 2 + abs(b10) ** 2 + abs(b11) ** 2
                    + abs(b20) ** 2 + abs(b21) ** 2)
            out = np.zeros((2, 3), np.complex128)
            if btot == 0.0:
                return out

            def solve_stream(a1c, a2c, b0, b1, mu):
                # (a1c h1 h1^H + a2c h2 h2^H + mu I) p = b, 2x2 closed form
                m00 = a1c * abs(h1[0]) ** 2 + a2c * abs(h2[0]) ** 2 + mu
                m11 = a1c * abs(h1[1]) ** 2 + a2c * abs(h2[1]) ** 2 + mu
                m01 = a1c * h1[0] * np.conj(h1[1]) + a2c * h2[0] * np.conj(h2[1])
                det = m00 * m11 - abs(m01) ** 2
                if det <= 1e-300:
                    return 1e300 + 0j, 1e300 + 0j
                x0 = (m11 * b0 - m01 * b1) / det
                x1 = (m00 * b1 - np.conj(m01) * b0) / det
                return x0, x1

            def power_at(mu):
                tot = 0.0
                if has_c:
                    x0, x1 = solve_stream(ac_1, ac_2, bc0, bc1, mu)
                    tot += abs(x0) ** 2 + abs(x1) ** 2
                x0, x1 = solve_stream(a1_1, a1_2, b10, b11, mu)
                tot += abs(x0) ** 2 + abs(x1) ** 2
                if has_p2:
                    x0, x1 = solve_stream(a2_1, a2_2, b20, b21, mu)
                    tot += abs(x0) ** 2 + abs(x1) ** 2
                return tot

            mu = 0.0
            if power_at(0.0) > pt:
                lo = 0.0
                hi = np.sqrt(btot / pt)
                for _ in range(64):
                    mid = 0.5 * (lo + hi)
                    if power_at(mid) > pt:
                        lo = mid
                    else:
                        hi = mid
                mu = hi
            if has_c:
                x0, x1 = solve_stream(ac_1, ac_2, bc0, bc1, mu)
                out[0, 0] = x0
                out[1, 0] = x1
            x0, x1 = solve_stream(a1_1, a1_2, b10, b11, mu)
            out[0, 1] = x0
            out[1, 1] = x1
            if has_p2:
                x0, x1 = solve_stream(a2_1, a2_2, b20, b21, mu)
                out[0, 2] = x0
                out[1, 2] = x1
            return out

        def _phi_c_gap(P):
            # phi_c1 - phi_c2 at P (frozen g, w); only used when has_c
            zc1 = np.conj(h1[0]) * P[0, 0] + np.conj(h1[1]) * P[1, 0]
            zc2 = np.conj(h2[0]) * P[0, 0] + np.conj(h2[1]) * P[1, 0]
            z11 = np.conj(h1[0]) * P[0, 1] + np.conj(h1[1]) * P[1, 1]
            z12 = np.conj(h1[0]) * P[0, 2] + np.conj(h1[1]) * P[1, 2]
            z21 = np.conj(h2[0]) * P[0, 1] + np.conj(h2[1]) * P[1, 1]
            z22 = np.conj(h2[0]) * P[0, 2] + np.conj(h2[1]) * P[1, 2]
            t1 = abs(zc1) ** 2 + abs(z11) ** 2 + abs(z12) ** 2 + sigma2
            t2 = abs(zc2) ** 2 + abs(z21) ** 2 + abs(z22) ** 2 + sigma2
            e1 = abs(gc1) ** 2 * t1 - 2.0 * (gc1 * zc1).real + 1.0
            e2 = abs(gc2) ** 2 * t2 - 2.0 * (gc2 * zc2).real + 1.0
            f1 = np.log(wc1) - wc1 * e1 + 1.0
            f2 = np.log(wc2) - wc2 * e2 + 1.0
            return f1 - f2

        if not has_c:
            P_new = _solve(0.0)
        else:
            P_hi = _solve(1.0)     # all common weight on RX1
            if _phi_c_gap(P_hi) <= 0.0:
                P_new = P_hi
            else:
                P_lo = _solve(0.0)
                if _phi_c_gap(P_lo) >= 0.0:
                    P_new = P_lo
                else:
                    lo = 0.0
                    hi = 1.0
                    for _ in range(40):
                        mid = 0.5 * (lo + hi)
                        if _phi_c_gap(_solve(mid)) > 0.0:
                            hi = mid
                        else:
                            lo = mid
                    P_new = _solve(hi)
                    P_alt = _solve(lo)
                    if _phi(P_alt[:, 0], P_alt[:, 1], P_alt[:, 2]) > \
                            _phi(P_new[:, 0], P_new[:, 1], P_new[:, 2]):
                        P_new = P_alt

        # never accept a surrogate regression (keeps the true objective
        # monotone even with finite bisection precision)
        if _phi(P_new[:, 0], P_new[:, 1], P_new[:, 2]) >= _phi(pc, p1, p2):
            pc = P_new[:, 0].copy()
            p1 = P_new[:, 1].copy()
            p2 = P_new[:, 2].copy()

        new_obj = _obj(pc, p1, p2)
        traj[it] = new_obj
        it_done = it
        if abs(new_obj - obj) < tol:
            obj = new_obj
            converged = True
            break
        obj = new_obj

    P_out = np.zeros((2, 3), np.complex128)
    P_out[:, 0] = pc
    P_out[:, 1] = p1
    P_out[:, 2] = p2
    return P_out, traj[: it_done + 1], it_done, converged


def _orth(v: np.ndarray) -> np.ndarray:
    return np.array([-np.conj(v[1]), np.conj(v[0])], dtype=np.complex128)


def _unit(v: np.ndarray) -> np.ndarray | None:
    n = np.linalg.norm(v)
    return None if n < 1e-30 else v / n


def _init_precoders(h1, h2, p_t, scheme: SchemeKind, init, seed: int) -> np.ndarray:
    """Initial (2, 3) precoder matrix [p_c p_1 p_2]; absent streams zeroed."""
    if isinstance(init, PrecoderSet):
        P = np.zeros((2, 3), dtype=np.complex128)
        for j, v in enumerate((init.p_c, init.p_1, init.p_2)):
            if v is not None:
                P[:, j] = v
        return P
    if init == "random":
        rng = np.random.default_rng(seed)
        P = rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3))
        P *= np.sqrt(p_t / np.vdot(P, P).real)
        return P
    if init != "mrt-zf":
        raise ValueError("init must be 'mrt-zf', 'random' or a PrecoderSet")

    u1, u2 = _unit(h1), _unit(h2)
    dc = _unit((u1 if u1 is not None else 0) + (u2 if u2 is not None else 0)) \
        if (u1 is not None or u2 is not None) else None

    def zf_dir(own, other):
        if own is None:
            return None
        if other is None:
            return own
        proj = own - np.vdot(other, own) * other
        d = _unit(proj)
        if d is None:
            # aligned channels: fall back to the orthogonal complement
            d = _unit(_orth(other))
        return d

    d1 = zf_dir(u1, u2)
    d2 = zf_dir(u2, u1)
    P = np.zeros((2, 3), dtype=np.complex128)
    if scheme == SchemeKind.SDMA:
        splits = (0.0, 0.5, 0.5)
    elif scheme == SchemeKind.NOMA:
        splits = (0.5, 0.5, 0.0)
    else:
        splits = (0.5, 0.25, 0.25)
    dirs = (dc, d1, d2)
    weights = np.array([s if d is not None else 0.0 for s, d in zip(splits, dirs)])
    if weights.sum() > 0:
        weights = weights / weights.sum()
    for j, (d, w) in enumerate(zip(dirs, weights)):
        if d is not None and w > 0:
            P[:, j] = np.sqrt(p_t * w) * d
    return P


_SCHEME_CODE = {SchemeKind.RSMA: 0, SchemeKind.SDMA: 1, SchemeKind.NOMA: 2}


def wmmse_optimize(csit: CsitEstimate, sigma2: float, p_t: float,
                   scheme: SchemeKind, opts: WmmseOptions = WmmseOptions(),
                   noma_strong_rx: int | None = None) -> WmmseResult:
    """Alternating WMMSE optimization of the scheme's sum rate on the CSIT.

    NOMA fixes RX1 as the strong (private-stream) user; if the channels say
    RX2 is stronger the user labels are swapped internally and the returned
    set is marked noma_swapped. noma_strong_rx (0 or 1) pins the role
    assignment instead, which keeps it stable across noisy CSIT draws.
    """
    if p_t <= 0 or sigma2 <= 0:
        raise ValueError("need p_t > 0 and sigma2 > 0")
    h1 = np.asarray(csit.h_tx_1, dtype=np.complex128).reshape(2)
    h2 = np.asarray(csit.h_tx_2, dtype=np.complex128).reshape(2)
    if np.linalg.norm(h1) == 0 and np.linalg.norm(h2) == 0:
        raise ValueError("CSIT is zero for both users")
    swapped = False
    if scheme == SchemeKind.NOMA:
        if noma_strong_rx is None:
            swapped = np.linalg.norm(h2) > np.linalg.norm(h1)
        else:
            swapped = noma_strong_rx == 1
        if swapped:
            h1, h2 = h2, h1
    p_init = _init_precoders(h1, h2, p_t, scheme, opts.init, opts.seed)
    P, traj, n_iters, converged = _wmmse_kernel(
        h1, h2, float(sigma2), float(p_t), _SCHEME_CODE[scheme], p_init,
        opts.max_iters, opts.tol)
    pc, pa, pb = P[:, 0], P[:, 1], P[:, 2]
    if scheme == SchemeKind.SDMA:
        pset = PrecoderSet(SchemeKind.SDMA, None, pa, pb, p_t)
    elif scheme == SchemeKind.NOMA:
        if swapped:
            pset = PrecoderSet(SchemeKind.NOMA, pc, None, pa, p_t, noma_swapped=True)
        else:
            pset = PrecoderSet(SchemeKind.NOMA, pc, pa, None, p_t)
    else:
        pset = PrecoderSet(SchemeKind.RSMA, pc, pa, pb, p_t)
    return WmmseResult(pset=pset, objective_bits=float(traj[-1]),
                       trajectory=np.asarray(traj), n_iters=int(n_iters),
                       converged=bool(converged))


def wmmse_multistart(csit: CsitEstimate, sigma2: float, p_t: float,
                     scheme: SchemeKind, opts: WmmseOptions = WmmseOptions()) -> WmmseResult:
    """Best of several deterministic starts.

    RSMA additionally warm-starts from the converged SDMA and NOMA solutions
    (which embed as RSMA points with a zeroed column), so its objective can
    never land below either special case.
    """
    results = [wmmse_optimize(csit, sigma2, p_t, scheme, opts)]
    if scheme == SchemeKind.RSMA:
        for donor_scheme in (SchemeKind.SDMA, SchemeKind.NOMA):
            try:
                donor = wmmse_optimize(csit, sigma2, p_t, donor_scheme, opts)
            except ValueError:
                continue
            d = donor.pset
            warm = PrecoderSet(SchemeKind.RSMA,
                               d.p_c if d.p_c is not None else np.zeros(2, complex),
                               d.p_1 if d.p_1 is not None else np.zeros(2, complex),
                               d.p_2 if d.p_2 is not None else np.zeros(2, complex),
                               p_t)
            res = wmmse_optimize(csit, sigma2, p_t, scheme,
                                 WmmseOptions(opts.max_iters, opts.tol, warm, opts.seed))
            results.append(res)
    return max(results, key=lambda r: r.objective_bits)
