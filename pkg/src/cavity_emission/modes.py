"""Cavity resonances and the per-mode constants used by the dynamics and
emission formulas.

A mode is "completed" once it carries the coupling to a particular atom
(alpha, R, zeta, detuning) and its out-coupling data (T, gamma_rad, kappa).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .multilayer import C_LIGHT, LayerStack, coefficients


class RegimeError(ValueError):
    """Parameters outside the weak/strong (non-superstrong) high-Q regime."""


class RootNotConverged(RuntimeError):
    pass


@dataclass(frozen=True)
class AtomConfig:
    """Two-level atom.  ``coupling`` is |d21|^2/(hbar eps0 A) in reduced units."""
    omega0: float
    z_A: float
    coupling: float = 0.0
    delta_omega: float = 0.0

    @property
    def omega_tilde0(self) -> float:
        return self.omega0 - self.delta_omega


@dataclass(frozen=True)
class ResonantMode:
    omega_k: float
    Gamma: float
    length: float = 1.0
    n1: complex = 1.0 + 0j         # interior index at Omega_k
    alpha: float = 0.0
    gamma_rad: float = float("nan")
    T: complex = complex("nan")
    kappa: complex = 0j
    detuning: float = 0.0          # omega_k - omega_tilde0
    zeta: complex = complex("nan")
    r31: complex = 1.0 + 0j        # mirror reflection seen from outside, at Omega_k

    @property
    def Omega(self) -> complex:
        return complex(self.omega_k, -0.5 * self.Gamma)

    @property
    def R(self) -> float:
        return math.sqrt(self.alpha * self.omega_k)

    @property
    def rho(self) -> float:
        return self.zeta.real

    @property
    def gamma(self) -> float:
        return -2.0 * self.zeta.imag

    @property
    def mu(self) -> complex:
        """Omega_k - omega_tilde0."""
        return complex(self.detuning, -0.5 * self.Gamma)

    @property
    def zero_coupling(self) -> bool:
        return self.alpha == 0.0

    @property
    def eta_inf(self) -> float:
        if self.zero_coupling:
            return 0.0
        G, g = self.Gamma, self.gamma
        return self.gamma_rad * G / (G**2 - g**2) * self.R**2 / (self.rho**2 + G**2 / 4)

    def check_regime(self):
        if not self.Gamma > 0:
            raise RegimeError("line width Gamma_k must be > 0")
        if self.zero_coupling:      # decoupled atom: nothing is emitted
            return self
        if self.gamma >= self.Gamma:
            raise RegimeError(
                f"superstrong coupling: gamma_k = {self.gamma:.6g} >= Gamma_k = {self.Gamma:.6g}; "
                "formulas assume gamma_k < Gamma_k")
        return self


def zeta_of(alpha, Omega, mu) -> complex:
    """zeta = sqrt(mu^2 + alpha*Omega), branch Re zeta >= 0."""
    z = np.sqrt(complex(mu) ** 2 + complex(alpha) * complex(Omega))
    if z.real < 0 or (z.real == 0 and z.imag > 0):
        z = -z
    return complex(z)


# ---------------------------------------------------------------------------
# roots

def polish_root(D: Callable[[complex], complex], seed: complex, tol: float = 1e-12,
                maxiter: int = 60) -> complex:
    """Newton iteration with a central-difference derivative."""
    z = complex(seed)
    for _ in range(maxiter):
        f = D(z)
        if abs(f) <= tol:
            return z
        h = 1e-7 * max(1.0, abs(z))
        df = (D(z + h) - D(z - h)) / (2 * h)
        if df == 0 or not np.isfinite(df):
            break
        step = f / df
        z -= step
        if not np.isfinite(z):
            break
    if abs(D(z)) <= tol:
        return z
    raise RootNotConverged(f"Newton did not converge from seed {seed} (|D| = {abs(D(z)):.3g})")


def D1(stack: LayerStack, omega) -> complex:
    co = coefficients(stack, omega)
    return complex(co.D[1])


def find_resonances(stack: LayerStack, band, tol: float = 1e-12) -> list:
    """All roots of D_1(W) = 1 + r13(W) exp(2 i beta_1(W) l) with Re W in band.

    One seed per free spectral range; failures are reported as warnings.
    """
    if not stack.perfect_mirror:
        raise ValueError("resonance search assumes a perfect left mirror")
    lo, hi = float(band[0]), float(band[1])
    if not 0 < lo < hi:
        raise ValueError("band must satisfy 0 < lo < hi")
    l = stack.length
    n_re = complex(stack.n(1, 0.5 * (lo + hi))).real
    fsr = math.pi * C_LIGHT / (n_re * l)
    if hi - lo < fsr:
        raise ValueError(f"band [{lo}, {hi}] is narrower than one free spectral range ({fsr:.6g})")
    m_lo = max(1, int(math.floor(lo / fsr)) - 1)
    m_hi = int(math.ceil(hi / fsr)) + 1
    roots = []
    failures = []
    for m in range(m_lo, m_hi + 1):
        w = m * fsr
        co = coefficients(stack, w)
        n1 = complex(stack.n(1, w))
        seed = (np.log(-1.0 / co.r13 + 0j) + 2j * math.pi * m) * C_LIGHT / (2j * n1 * l)
        try:
            root = polish_root(lambda W: D1(stack, W), seed, tol=tol)
        except RootNotConverged as exc:
            failures.append(str(exc))
            continue
        if root.imag >= 0 or not lo <= root.real <= hi:
            continue
        roots.append(root)
    for msg in failures:
        warnings.warn(msg, RuntimeWarning)
    roots.sort(key=lambda z: z.real)
    out = []
    for r in roots:
        if out and abs(r - out[-1]) < -2 * out[-1].imag / 10:
            continue
        out.append(r)
    return [ResonantMode(omega_k=r.real, Gamma=-2 * r.imag, length=l,
                         n1=complex(stack.n(1, r))) for r in out]


# ---------------------------------------------------------------------------
# constants

def mode_constants(stack: LayerStack, mode: ResonantMode, atom: AtomConfig) -> ResonantMode:
    """Fill alpha, T, gamma_rad, kappa, zeta from the stack at Omega_k."""
    l = stack.length
    if not 0 < atom.z_A < l:
        raise ValueError("atom must sit inside the cavity (0 < z_A < l)")
    Om = mode.Omega
    co = coefficients(stack, Om)
    n1 = complex(stack.n(1, Om))
    an = abs(n1)
    wk = mode.omega_k
    s = math.sin(wk * an * atom.z_A / C_LIGHT)
    alpha = 4 * atom.coupling * s**2 / (an**2 * l)
    t13 = complex(co.t13)
    ph = np.exp(1j * wk * n1 * l / C_LIGHT)
    T = t13 * ph / math.sqrt(an)
    gamma_rad = C_LIGHT * abs(T) ** 2 / (2 * an * l)
    kappa = (-wk * math.sqrt(atom.coupling / math.pi) * math.sqrt(C_LIGHT / wk)
             * np.conj(t13) * np.exp(-1j * wk * n1 * l / C_LIGHT) / (an**2 * l) * s)
    detuning = wk - atom.omega_tilde0
    mu = complex(detuning, -0.5 * mode.Gamma)
    zeta = zeta_of(alpha, Om, mu)
    if alpha == 0.0:
        warnings.warn("atom sits at a field node: zero coupling", RuntimeWarning)
    return replace(mode, length=l, n1=n1, alpha=alpha, gamma_rad=gamma_rad, T=complex(T),
                   kappa=complex(kappa), detuning=detuning, zeta=zeta, r31=complex(co.r31))


def reduced_mode(gamma_rad_ratio: float, detuning_ratio: float, rabi_ratio: float,
                 omega_ratio: float, length_ratio: float = 0.7):
    """Mode and atom from dimensionless ratios with Gamma_k = 1.

    length_ratio is Gamma_k l / c.  kappa is real, T = sqrt(2 l gamma_rad / c).
    """
    if not 0 < gamma_rad_ratio <= 1:
        raise ValueError("need 0 < gamma_rad/Gamma <= 1")
    if rabi_ratio < 0 or not omega_ratio > 0:
        raise ValueError("need R >= 0 and omega_k > 0")
    if not length_ratio > 0:
        raise ValueError("cavity length must be > 0")
    G = 1.0
    wk = float(omega_ratio)
    l = float(length_ratio) * C_LIGHT / G
    alpha = rabi_ratio**2 / wk
    mu = complex(detuning_ratio, -0.5 * G)
    Om = complex(wk, -0.5 * G)
    zeta = zeta_of(alpha, Om, mu)
    gamma_rad = gamma_rad_ratio * G
    mode = ResonantMode(omega_k=wk, Gamma=G, length=l, n1=1.0 + 0j, alpha=alpha,
                        gamma_rad=gamma_rad, T=complex(math.sqrt(2 * l * gamma_rad / C_LIGHT)),
                        kappa=complex(rabi_ratio * math.sqrt(gamma_rad / (2 * math.pi))),
                        detuning=float(detuning_ratio), zeta=zeta, r31=1.0 + 0j)
    mode.check_regime()
    # antinode placement; coupling chosen to reproduce alpha
    atom = AtomConfig(omega0=wk - detuning_ratio, z_A=0.5 * l, coupling=alpha * l / 4)
    return mode, atom


# ---------------------------------------------------------------------------
# cavity-induced shift

def _shift_term(m: ResonantMode, a: float, omega0: float) -> float:
    Om = m.Omega
    return -(m.alpha / (4 * abs(a - Om) ** 2)
             * (a * m.omega_k - abs(Om) ** 2 - a * m.Gamma / (4 * math.pi) * math.log(m.omega_k / omega0)))


def frequency_shift(modes: Sequence[ResonantMode], atom: AtomConfig, selected: int) -> float:
    """Closed-form shift summed over the off-resonant lines k' != selected."""
    if len(modes) < 2:
        raise ValueError("frequency shift needs at least two modes")
    a = atom.omega_tilde0
    return float(sum(_shift_term(m, a, atom.omega0) for i, m in enumerate(modes) if i != selected))


def shift_pv_single(mode: ResonantMode, a: float) -> float:
    """Principal-value oracle for one off-resonant line, using the single-pole
    form w^2 Im G^S(zA, zA, w) = (alpha/4)(Gamma/2) w / |w - Omega|^2 (times pi/coupling):
        dw = -(alpha Gamma / 8 pi) PV int_0^inf w / (|w - Omega|^2 (a - w)) dw.
    """
    if abs(a - mode.omega_k) < mode.Gamma:
        raise ValueError("transition frequency coincides with the line centre; PV oracle refuses")
    Om = mode.Omega

    def f(w):
        return w / abs(w - Om) ** 2

    fa = f(a)

    def g(w):  # PV int_0^{2a} 1/(a - w) vanishes, so subtract the pole value
        return (f(w) - fa) / (a - w) if w != a else -(1 / abs(a - Om) ** 2 - 2 * a * (a - Om.real) / abs(a - Om) ** 4)

    pts = sorted({mode.omega_k, a})
    core = integrate.quad(g, 0.0, 2 * a, points=pts, limit=800, epsabs=0, epsrel=1e-11)[0]
    tail = integrate.quad(lambda w: f(w) / (a - w), 2 * a, np.inf, limit=400, epsabs=0, epsrel=1e-11)[0]
    return float(-(mode.alpha * mode.Gamma / (8 * math.pi)) * (core + tail))


def frequency_shift_pv(modes: Sequence[ResonantMode], atom: AtomConfig, selected: int) -> float:
    a = atom.omega_tilde0
    for i, m in enumerate(modes):
        if i != selected and abs(a - m.omega_k) < m.Gamma:
            raise ValueError(f"omega_tilde0 coincides with off-resonant line {i}; PV oracle refuses")
    return float(sum(shift_pv_single(m, a) for i, m in enumerate(modes) if i != selected))
