"""Quantities of quantum noise theory (QNT) set against the exact description:
inside/outside splits of the outgoing wave packet, the relevant output mode,
the commutator-related modes and the noise kernel.

Conventions follow ``emission``: offsets dw = w - w_k, rotating frame, the
mirror plate at z = 0.  With hbar w_k / (2 eps0 A) = 1 the prefactor
2 eps0 A / (hbar w_k) of the split efficiencies is 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .emission import (CONTINUING, SHORT_TERM, _prefactor, efficiency, f_spectrum,
                       phi_exterior, phi_interior)
from .modes import AtomConfig, ResonantMode
from .multilayer import C_LIGHT


@dataclass(frozen=True)
class SplitModeReport:
    regime: str
    t: float
    tau: float | None
    N_gt: float
    N_lt: float
    eta: float
    eta_gt: float
    eta_lt: float
    eta_rel: float | None = None
    eta_lt_closed: float | None = None


def _int_abs2(fun, a, b, t_scale):
    if b <= a:
        return 0.0
    n_osc = max(1.0, (b - a) * t_scale)
    val = integrate.quad(lambda z: abs(fun(z)) ** 2, a, b, limit=int(200 + 20 * n_osc),
                         epsabs=0, epsrel=1e-12)[0]
    return float(val)


def split_mode_etas(mode: ResonantMode, atom: AtomConfig, t: float) -> SplitModeReport:
    """eta^> = eta N^>, eta^< = (Gamma/gamma_rad) eta N^< with N the z-integrals of
    |phi_1|^2 over (0, ct) and (-l, 0)."""
    if not t > 0:
        raise ValueError("t must be > 0")
    l = mode.length
    eta = efficiency(mode, atom, t)
    pref = complex(_prefactor(mode, np.asarray(eta)))
    scale = abs(mode.rho) / (2 * math.pi * C_LIGHT) + 1.0
    Ng = _int_abs2(lambda z: phi_exterior(mode, t - z / C_LIGHT, pref), 0.0, C_LIGHT * t, scale)
    Nl = _int_abs2(lambda z: phi_interior(mode, t - z / C_LIGHT, t, pref), -l, 0.0, scale)
    return SplitModeReport(CONTINUING, float(t), None, Ng, Nl, eta, eta * Ng,
                           mode.Gamma / mode.gamma_rad * eta * Nl)


def eta_rel(mode: ResonantMode, t):
    """(gamma_rad/Gamma)(1 - exp(-Gamma t))."""
    t = np.asarray(t, dtype=float)
    out = mode.gamma_rad / mode.Gamma * -np.expm1(-mode.Gamma * t)
    return float(out) if out.ndim == 0 else out


def split_mode_etas_st(mode: ResonantMode, atom: AtomConfig, t: float, tau: float) -> SplitModeReport:
    """Short-term split at z = c(t - tau): leading edge over (c(t-tau), ct),
    trailing edge over (0, c(t-tau)); eta^{><} = eta(tau) N^{><}."""
    if not (tau > 0 and t >= tau):
        raise ValueError("need t >= tau > 0")
    eta = efficiency(mode, atom, t, SHORT_TERM, tau)
    pref = complex(_prefactor(mode, np.asarray(eta)))
    scale = abs(mode.rho) / (2 * math.pi * C_LIGHT) + 1.0
    zs = C_LIGHT * (t - tau)
    Ng = _int_abs2(lambda z: phi_exterior(mode, t - z / C_LIGHT, pref), zs, C_LIGHT * t, scale)
    Nl = _int_abs2(lambda z: phi_interior(mode, t - z / C_LIGHT, tau, pref), 0.0, zs, scale)
    er = eta_rel(mode, t - tau)
    closed = (mode.R**2 / abs(mode.zeta) ** 2 * abs(np.sin(mode.zeta * tau / 2)) ** 2
              * math.exp(-mode.Gamma * tau / 2) * er)
    return SplitModeReport(SHORT_TERM, float(t), float(tau), Ng, Nl, eta, eta * Ng, eta * Nl,
                           er, float(closed))


def split_overlap_oracle(mode: ResonantMode, atom: AtomConfig, t: float, side: str, dw,
                         nz: int = 2001, tau: float | None = None) -> float:
    """eta^{><} = |int dw F1^{><}(w) F^{><}*(w)|^2 with
    F1^{><} = (2 pi c N)^{-1/2} int_{><} dz exp(i w z/c) phi^{><}(z) built by
    z-quadrature and F^{><} the closed-form spectrum (times sqrt(Gamma/gamma_rad)
    for the cavity interior)."""
    from numpy.polynomial.legendre import leggauss
    dw = np.asarray(dw, dtype=float)
    l = mode.length
    regime = CONTINUING if tau is None else SHORT_TERM
    eta = efficiency(mode, atom, t, regime, tau)
    pref = complex(_prefactor(mode, np.asarray(eta)))
    if tau is None:
        if side == ">":
            a, b, fun = 0.0, C_LIGHT * t, lambda z: phi_exterior(mode, t - z / C_LIGHT, pref)
        else:
            a, b, fun = -l, 0.0, lambda z: phi_interior(mode, t - z / C_LIGHT, t, pref)
    else:
        zs = C_LIGHT * (t - tau)
        if side == ">":
            a, b, fun = zs, C_LIGHT * t, lambda z: phi_exterior(mode, t - z / C_LIGHT, pref)
        else:
            a, b, fun = 0.0, zs, lambda z: phi_interior(mode, t - z / C_LIGHT, tau, pref)
    npan = max(1, nz // 16)
    x, w = leggauss(16)
    edges = np.linspace(a, b, npan + 1)
    half = 0.5 * np.diff(edges)
    zq = (0.5 * (edges[1:] + edges[:-1])[:, None] + half[:, None] * x).ravel()
    wq = (half[:, None] * w).ravel()
    ph = fun(zq)
    N = float(np.sum(wq * np.abs(ph) ** 2))
    F = f_spectrum(mode, atom, dw, t, regime, tau)
    if tau is None and side == "<":
        F = math.sqrt(mode.Gamma / mode.gamma_rad) * F
    F1 = np.empty(dw.size, complex)
    for i in range(0, dw.size, 512):
        d = dw[i:i + 512]
        F1[i:i + 512] = np.exp(1j * np.outer(d, zq) / C_LIGHT) @ (wq * ph)
    F1 /= math.sqrt(2 * math.pi * C_LIGHT * N)
    acc = np.trapezoid(F1 * np.conj(F), dw)
    return float(abs(acc) ** 2)


def qnt_characteristic(beta, eta_split: float):
    """Single-mode QNT characteristic function exp(-|b|^2/2)(1 - eta^{><}|b|^2).
    Emitted as data for comparison; it does not describe a prepared state."""
    b2 = np.abs(beta) ** 2
    return np.exp(-b2 / 2) * (1 - eta_split * b2)


# ---------------------------------------------------------------------------
# relevant output mode

@dataclass(frozen=True)
class RelevantMode:
    t: float
    dw: np.ndarray
    F_rel: np.ndarray
    eta_rel: float
    eta_rel_numeric: float
    z: np.ndarray | None = None
    phi_rel: np.ndarray | None = None


def f_rel(mode: ResonantMode, dw, t: float):
    """(i/sqrt(2 pi)) sqrt(c/(2 n1 l)) T* exp(i w t) (exp(-i(w - Omega*)t) - 1)/(w - Omega*)."""
    dw = np.asarray(dw, dtype=float)
    x = dw - 0.5j * mode.Gamma          # w - Omega*
    amp = 1j / math.sqrt(2 * math.pi) * np.sqrt(C_LIGHT / (2 * mode.n1 * mode.length)) * np.conj(mode.T)
    return amp * np.exp(1j * dw * t) * np.expm1(-1j * x * t) / x


def phi_rel(mode: ResonantMode, z, t: float):
    """-Theta(z)Theta(ct - z) (2l)^{-1/2} T* exp(i Omega* (t - z/c))."""
    z = np.asarray(z, dtype=float)
    s = t - z / C_LIGHT
    val = -np.conj(mode.T) / math.sqrt(2 * mode.length) * np.exp(-0.5 * mode.Gamma * s)
    return np.where((z >= 0) & (z <= C_LIGHT * t), val, 0.0 + 0j)


def _rel_tail(mode: ResonantMode, t: float, lo: float, hi: float) -> float:
    """Leading-order weight of |F_rel|^2 outside [lo, hi]:
    |A|^2 (1 + exp(-Gamma t)) (1/hi - 1/lo); the cross term oscillates away."""
    a2 = C_LIGHT / (2 * mode.length * abs(mode.n1)) * abs(mode.T) ** 2 / (2 * math.pi)
    return a2 * (1 + math.exp(-mode.Gamma * t)) * (1 / hi - 1 / lo)


def relevant_mode(mode: ResonantMode, t: float, dw, z=None) -> RelevantMode:
    """F_rel on the grid, eta_rel in closed form and by quadrature (trapezoid
    plus the asymptotic weight beyond the grid ends), optional phi_rel(z)."""
    if not t >= 0:
        raise ValueError("t must be >= 0")
    dw = np.asarray(dw, dtype=float)
    F = f_rel(mode, dw, t)
    num = float(np.trapezoid(np.abs(F) ** 2, dw))
    if dw[0] < 0 < dw[-1]:
        num += _rel_tail(mode, t, dw[0], dw[-1])
    zz = None if z is None else np.asarray(z, dtype=float)
    return RelevantMode(float(t), dw, F, eta_rel(mode, t), num, zz,
                        None if zz is None else phi_rel(mode, zz, t))


# ---------------------------------------------------------------------------
# commutator-related modes

@dataclass(frozen=True)
class CommutatorModes:
    t: float
    dw: np.ndarray
    F_k: np.ndarray
    F_in: np.ndarray
    F_out: np.ndarray
    overlap: complex
    overlap_normalized: float


def f_k(mode: ResonantMode, dw):
    """sqrt(c/2l) sqrt(Gamma/gamma_rad) T/sqrt(2 pi) i/(w - Omega)."""
    if not mode.gamma_rad > 0:
        raise ValueError("gamma_rad must be > 0")
    dw = np.asarray(dw, dtype=float)
    return (math.sqrt(C_LIGHT / (2 * mode.length)) * math.sqrt(mode.Gamma / mode.gamma_rad)
            * mode.T / math.sqrt(2 * math.pi) * 1j / (dw + 0.5j * mode.Gamma))


def commutator_mode(mode: ResonantMode, t: float, dw, r31_phase=None) -> CommutatorModes:
    """F_k, F_in = F_k exp(-i w t), F_out = (r31*/|r31|) F_k exp(i w t) and the
    overlap int F_rel* F_out dw.  ``r31_phase`` is an optional callable of dw
    (default: unit phase)."""
    dw = np.asarray(dw, dtype=float)
    Fk = f_k(mode, dw)
    ph = np.ones_like(dw, dtype=complex) if r31_phase is None else np.asarray(r31_phase(dw))
    Fin = Fk * np.exp(-1j * dw * t)
    Fout = ph * Fk * np.exp(1j * dw * t)
    Fr = f_rel(mode, dw, t)
    ov = complex(np.trapezoid(np.conj(Fr) * Fout, dw))
    nr = math.sqrt(np.trapezoid(np.abs(Fr) ** 2, dw))
    no = math.sqrt(np.trapezoid(np.abs(Fout) ** 2, dw))
    return CommutatorModes(float(t), dw, Fk, Fin, Fout, ov, abs(ov) / (nr * no) if nr * no > 0 else 0.0)


def phi_com(mode: ResonantMode, z, t: float, r31_phase: complex = 1.0):
    """Theta(z - ct) (2l)^{-1/2} sqrt(Gamma/gamma_rad) (r31*/|r31|) T exp(i Omega (t - z/c))."""
    z = np.asarray(z, dtype=float)
    s = t - z / C_LIGHT
    with np.errstate(over="ignore"):
        val = (math.sqrt(mode.Gamma / mode.gamma_rad) / math.sqrt(2 * mode.length) * r31_phase
               * mode.T * np.exp(0.5 * mode.Gamma * np.minimum(s, 0.0)))
    return np.where(z > C_LIGHT * t, val, 0.0 + 0j)


# ---------------------------------------------------------------------------
# inside field, noise kernel

def inside_field(mode: ResonantMode, atom: AtomConfig, dw, t: float):
    """F^(1) = sqrt(Gamma/gamma_rad) F, eta^(1) = (Gamma/gamma_rad) eta; returns
    (F^(1), eta^(1), F1^(1)) with F1^(1) the normalized mode (identical to F1)."""
    if not mode.gamma_rad > 0:
        raise ValueError("gamma_rad = 0: no out-coupling")
    ratio = mode.Gamma / mode.gamma_rad
    F = f_spectrum(mode, atom, dw, t)
    F_in = math.sqrt(ratio) * F
    eta1 = ratio * efficiency(mode, atom, t)
    return F_in, eta1, F_in / math.sqrt(eta1)


def noise_upsilon(mode: ResonantMode, dw, dwp, t: float):
    """upsilon(w, w', t) with Delta t -> 0 and t0 = 0 (rotating frame):
        (1/2pi) c/(2 n1* l) / (w - Omega*)
        [ (e^{i w' t} - e^{i Omega* t})/(w' - Omega*) - (e^{i w t} - e^{i w' t})/(w - w') ],
    the second bracket term taking its limit i t e^{i w t} at w = w'."""
    dw = np.asarray(dw, dtype=float)
    dwp = np.asarray(dwp, dtype=float)
    Oc = 0.5j * mode.Gamma                       # Omega* - w_k
    pre = (1 / (2 * math.pi)) * C_LIGHT / (2 * np.conj(mode.n1) * mode.length) / (dw - Oc)
    first = np.exp(1j * dwp * t) * -np.expm1(1j * (Oc - dwp) * t) / (dwp - Oc)
    diff = dw - dwp
    with np.errstate(invalid="ignore", divide="ignore"):
        # (e^{i w t} - e^{i w' t})/(w - w') = e^{i w' t} (e^{i (w-w') t} - 1)/(w - w')
        second = np.where(np.abs(diff * t) < 1e-8,
                          1j * t * np.exp(1j * dwp * t) * (1 + 0.5j * diff * t),
                          np.exp(1j * dwp * t) * np.expm1(1j * diff * t) / np.where(diff == 0, 1, diff))
    return pre * (first - second)


def g_k_in(mode: ResonantMode, dw, dwp, t: float, r31: complex = 1.0):
    """Input-noise weight split into (delta-function weight at w = w', regular part):
    r31*(w) exp(i w' t) delta(w - w') - T*^2 upsilon(w, w', t)."""
    dwp = np.asarray(dwp, dtype=float)
    return np.conj(r31) * np.exp(1j * dwp * t), -np.conj(mode.T) ** 2 * noise_upsilon(mode, dw, dwp, t)
