"""Outgoing single-photon field: spectral amplitude F(w, t), extraction
efficiency, the quantum state of the excited outgoing mode, and the
spatio-temporal wave packet.

Frequencies are passed as offsets ``dw = w - w_k`` and every complex amplitude
is returned in the frame rotating with the cavity line: F carries the carrier
exp(i w_k t) and phi carries exp(i w_k (t - z/c)), both dropped.  Moduli and
overlaps are unaffected.  Cavity coordinates: the mirror plate sits at z = 0,
the cavity interior is -l < z < 0, free space is z > 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import c2_analytic
from .modes import AtomConfig, ResonantMode
from .multilayer import C_LIGHT

CONTINUING = "continuing"
SHORT_TERM = "short-term"


def _regime(regime, t, tau):
    if regime == CONTINUING:
        if tau is not None:
            raise ValueError("tau is only meaningful in the short-term regime")
        return
    if regime == SHORT_TERM:
        if tau is None or not tau > 0:
            raise ValueError("short-term regime needs tau > 0")
        if np.any(np.asarray(t) < tau):
            raise ValueError("short-term regime needs t >= tau")
        return
    raise ValueError(f"unknown regime {regime!r}")


def _check_omega(mode, dw):
    if np.any(mode.omega_k + np.asarray(dw) <= 0):
        raise ValueError("frequencies must be positive")


# ---------------------------------------------------------------------------
# spectrum

def _f_continuing(mode: ResonantMode, atom: AtomConfig, dw, t: float):
    G, D = mode.Gamma, mode.detuning
    zc = np.conj(mode.zeta)
    c2s = np.conj(np.exp(1j * atom.delta_omega * t) * c2_analytic(mode, atom, t))
    den = (dw + D / 2 - 0.25j * G) ** 2 - zc**2 / 4
    bracket = np.exp(1j * dw * t) - np.exp(-1j * D * t) * c2s
    tail = (-(1j * np.conj(mode.alpha * mode.Omega)) / (2 * zc) * np.sin(zc * t / 2)
            / (dw - 0.5j * G) * np.exp(0.5j * (-D + 0.5j * G) * t))
    return mode.kappa / 2 / den * (bracket + tail)


def f_spectrum(mode: ResonantMode, atom: AtomConfig, dw, t: float, regime: str = CONTINUING,
               tau: float | None = None):
    """Closed-form F(w, t) in the rotating frame; short-term: F(w, t, tau) = exp(i w (t - tau)) F(w, tau)."""
    _regime(regime, t, tau)
    dw = np.asarray(dw, dtype=float)
    _check_omega(mode, dw)
    if regime == SHORT_TERM:
        return np.exp(1j * dw * (t - tau)) * _f_continuing(mode, atom, dw, tau)
    return _f_continuing(mode, atom, dw, t)


def _gauss_nodes(t, panel):
    npan = max(1, int(math.ceil(t / panel)))
    x, w = np.polynomial.legendre.leggauss(12)
    edges = np.linspace(0.0, t, npan + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def f_spectrum_oracle(mode: ResonantMode, atom: AtomConfig, dw, t: float):
    """Time-domain quadrature of the source integral with the single-pole
    Green function:
        F = (i kappa / 2) exp(i w t) / (w - Omega*) int_0^t C~2*(t') exp(-i (w - w~0) t') dt'.
    """
    dw = np.asarray(dw, dtype=float)
    _check_omega(mode, dw)
    if t == 0:
        return np.zeros_like(dw, dtype=complex)
    wmax = float(np.max(np.abs(dw))) + abs(mode.detuning) + abs(mode.zeta) + 1.0
    nodes, weights = _gauss_nodes(t, min(0.5, 2.0 / wmax))
    c2c = np.conj(c2_analytic(mode, atom, nodes)) * weights
    out = np.empty(dw.shape, complex)
    flat = dw.ravel()
    res = np.empty(flat.size, complex)
    for i in range(0, flat.size, 256):
        d = flat[i:i + 256]
        E = np.exp(-1j * np.outer(d + mode.detuning, nodes))
        res[i:i + 256] = E @ c2c
    out[...] = res.reshape(dw.shape)
    return 0.5j * mode.kappa * np.exp(1j * dw * t) * out / (dw - 0.5j * mode.Gamma)


# ---------------------------------------------------------------------------
# efficiency

def efficiency(mode: ResonantMode, atom: AtomConfig, t, regime: str = CONTINUING,
               tau: float | None = None):
    """eta(t) = [gamma_rad Gamma/(Gamma^2 - gamma^2)] [R^2/(rho^2 + Gamma^2/4)] (1 - |C~2(t)|^2);
    short-term: eta(tau) for every t >= tau."""
    _regime(regime, t, tau)
    mode.check_regime()
    tt = np.full(np.shape(t), tau, dtype=float) if regime == SHORT_TERM else np.asarray(t, dtype=float)
    pref = mode.eta_inf
    out = pref * (1 - np.abs(c2_analytic(mode, atom, tt)) ** 2)
    return float(out) if np.ndim(out) == 0 else out


def default_grid(mode: ResonantMode, half_width: float | None = None, n: int = 2**14):
    W = half_width if half_width is not None else 20 * max(abs(mode.rho), mode.Gamma)
    return np.linspace(-W, W, n)


def efficiency_numeric(mode: ResonantMode, atom: AtomConfig, t: float, regime: str = CONTINUING,
                       tau: float | None = None, dw=None):
    """int |F(w, t)|^2 dw on a finite grid (trapezoid)."""
    dw = default_grid(mode) if dw is None else np.asarray(dw, dtype=float)
    F = f_spectrum(mode, atom, dw, t, regime, tau)
    return float(np.trapezoid(np.abs(F) ** 2, dw))


@dataclass(frozen=True)
class SpectralAmplitude:
    regime: str
    t: float
    tau: float | None
    omega_k: float
    dw: np.ndarray
    F: np.ndarray
    eta: float

    @property
    def F1(self):
        return self.F / math.sqrt(self.eta)

    def norm_F1(self) -> float:
        return float(np.trapezoid(np.abs(self.F1) ** 2, self.dw))


def spectrum(mode: ResonantMode, atom: AtomConfig, t: float, regime: str = CONTINUING,
             tau: float | None = None, dw=None, eta: str = "numeric") -> SpectralAmplitude:
    """Sampled F with its normalization.  eta='numeric' uses int |F|^2 on the
    grid (so F1 is unit-norm on the grid), 'closed' uses the closed form."""
    dw = default_grid(mode) if dw is None else np.asarray(dw, dtype=float)
    F = f_spectrum(mode, atom, dw, t, regime, tau)
    e = float(np.trapezoid(np.abs(F) ** 2, dw)) if eta == "numeric" else efficiency(mode, atom, t, regime, tau)
    return SpectralAmplitude(regime, float(t), tau, mode.omega_k, dw, F, e)


# ---------------------------------------------------------------------------
# quantum state

@dataclass(frozen=True)
class ModeQuantumState:
    """(1 - eta) |0><0| + eta |1><1| for the excited outgoing mode."""
    eta: float

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("eta must lie in [0, 1]")

    def char(self, beta):
        b2 = np.abs(beta) ** 2
        return np.exp(-b2 / 2) * (1 - self.eta * b2)

    def wigner(self, alpha):
        a2 = np.abs(alpha) ** 2
        return (2 / np.pi) * np.exp(-2 * a2) * (1 - 2 * self.eta * (1 - 2 * a2))

    @staticmethod
    def vacuum_char(beta):
        return np.exp(-np.abs(beta) ** 2 / 2)

    @staticmethod
    def vacuum_wigner(alpha):
        return (2 / np.pi) * np.exp(-2 * np.abs(alpha) ** 2)

    def wigner_norm(self) -> float:
        """Radial quadrature of int W d^2 alpha."""
        from scipy import integrate
        val = integrate.quad(lambda r: 2 * np.pi * r * self.wigner(r), 0, np.inf,
                             epsabs=1e-14, epsrel=1e-12)[0]
        return float(val)


def quantum_state(eta: float) -> ModeQuantumState:
    return ModeQuantumState(float(eta))


# ---------------------------------------------------------------------------
# pulse

@dataclass(frozen=True)
class WavePacketGrid:
    z: np.ndarray
    t: np.ndarray
    phi: np.ndarray          # shape (len(t), len(z))
    region: np.ndarray       # labels, same shape
    regime: str
    tau: float | None = None

    @property
    def abs_phi(self):
        return np.abs(self.phi)


def _prefactor(mode, eta):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(eta > 0, np.sqrt(2 * np.pi / (C_LIGHT * np.where(eta > 0, eta, 1.0))), 0.0) \
            * mode.kappa / np.conj(mode.zeta)


def phi_exterior(mode: ResonantMode, s, pref):
    """Leading / exterior piece as a function of the retarded time s = t - z/c."""
    zc = np.conj(mode.zeta)
    return pref * np.exp(0.5j * (-mode.detuning + 0.5j * mode.Gamma) * s) * np.sin(zc * s / 2)


def phi_interior(mode: ResonantMode, s, t, pref):
    """Interior (continuing) or trailing (short-term, t -> tau) piece."""
    zc = np.conj(mode.zeta)
    return (pref * np.exp(-0.5 * mode.Gamma * s)
            * np.exp(0.5j * (-mode.detuning - 0.5j * mode.Gamma) * t) * np.sin(zc * t / 2))


def pulse(mode: ResonantMode, atom: AtomConfig, z, t, regime: str = CONTINUING,
          tau: float | None = None) -> WavePacketGrid:
    """Closed-form normalized wave packet phi_1(z, t) on the grid z x t.

    continuing:  -Theta(z+l)Theta(-z) phi< - Theta(z)Theta(ct-z) phi>
    short-term:  split at z = c(t - tau) into trailing and leading edges,
                 normalized with eta(tau).
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    _regime(regime, t, tau)
    if np.any(t < 0):
        raise ValueError("t must be >= 0")
    l = mode.length
    Z, T = np.meshgrid(z, t)
    S = T - Z / C_LIGHT
    inside = (Z >= -l) & (Z <= C_LIGHT * T)
    if regime == CONTINUING:
        eta = efficiency(mode, atom, t)
        pref = _prefactor(mode, np.asarray(eta))[:, None]
        split = np.zeros_like(T)
        lead = phi_exterior(mode, S, pref)
        trail = phi_interior(mode, S, T, pref)
        labels = ("exterior", "interior")
    else:
        eta = efficiency(mode, atom, tau, SHORT_TERM, tau)
        pref = _prefactor(mode, np.asarray(eta))
        split = C_LIGHT * (T - tau)
        lead = phi_exterior(mode, S, pref)
        trail = phi_interior(mode, S, tau, pref)
        labels = ("leading", "trailing")
    is_lead = Z >= split
    phi = np.where(inside, -np.where(is_lead, lead, trail), 0.0 + 0j)
    region = np.where(inside, np.where(is_lead, labels[0], labels[1]), "none")
    return WavePacketGrid(z, t, phi, region, regime, tau)


def pulse_numeric_oracle(amp: SpectralAmplitude, z, length: float) -> WavePacketGrid:
    """phi_1(z, t) = (1/sqrt(2 pi c)) int dw exp(-i w z/c) F1(w, t), with
    Theta(z + l) applied afterwards (trapezoid over the sampled band)."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    dw = amp.dw
    step = float(dw[1] - dw[0])
    period = 2 * math.pi * C_LIGHT / step
    span = float(z.max() - z.min()) if z.size > 1 else 0.0
    if span >= period:
        raise ValueError(f"aliasing: z span {span:.4g} exceeds the implied period {period:.4g}; "
                         f"use frequency spacing < {2*math.pi*C_LIGHT/span:.4g}")
    if amp.eta <= 0:
        phi = np.zeros(z.shape, complex)
    else:
        wts = np.full(dw.shape, step)
        wts[0] = wts[-1] = 0.5 * step
        F1w = amp.F1 * wts
        phi = np.empty(z.shape, complex)
        for i in range(0, z.size, 64):
            zz = z[i:i + 64]
            phi[i:i + 64] = np.exp(-1j * np.outer(zz, dw) / C_LIGHT) @ F1w
        phi /= math.sqrt(2 * math.pi * C_LIGHT)
        phi[z < -length] = 0.0
    region = np.where(z < -length, "none", np.where(z < 0, "interior", "exterior"))
    return WavePacketGrid(z, np.array([amp.t]), phi[None, :], region[None, :], amp.regime, amp.tau)


def intensity(mode: ResonantMode, atom: AtomConfig, z, t, regime: str = CONTINUING,
              tau: float | None = None):
    """I(z, t) = eta |phi_1(z, t)|^2."""
    wp = pulse(mode, atom, z, t, regime, tau)
    eta = efficiency(mode, atom, wp.t, regime, tau)
    return np.asarray(eta)[:, None] * np.abs(wp.phi) ** 2
