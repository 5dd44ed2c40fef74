"""Planar multilayer cavity: permittivity models, interface coefficients and
the one-dimensional Green function.

Regions are indexed j = 0..3: left mirror, cavity interior, fractionally
transparent mirror, free space.  Positions are given per region in shifted
local coordinates, 0 < z < d_j (region 3: 0 < z < inf).  Units: c = 1, all
lengths in c/Gamma_ref.

The Green function solves (d^2/dz^2 + eps(z) w^2/c^2) G(z, z', w) = -delta(z - z'),
so that in a homogeneous medium G = i exp(i beta |z - z'|) / (2 beta).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

import numpy as np
from scipy import integrate

C_LIGHT = 1.0


@dataclass(frozen=True)
class UnitSystem:
    """Dimensionless unit record.

    ``field_norm`` is hbar*omega_k/(2*eps0*A); only ratios are physical, so it
    is fixed to 1.  ``coupling`` values elsewhere are |d21|^2/(hbar*eps0*A).
    """
    c: float = 1.0
    gamma_ref: float = 1.0
    field_norm: float = 1.0


UNITS = UnitSystem()


# ---------------------------------------------------------------------------
# permittivity models

@dataclass(frozen=True)
class ConstPermittivity:
    eps: complex = 1.0

    def __post_init__(self):
        if complex(self.eps).imag < 0:
            raise ValueError("passivity violated: Im eps < 0 (amplifying media are not supported)")

    def __call__(self, omega):
        return np.full(np.shape(omega), complex(self.eps)) if np.ndim(omega) else complex(self.eps)

    def to_dict(self):
        e = complex(self.eps)
        return {"kind": "const", "re": e.real, "im": e.imag}


@dataclass(frozen=True)
class LorentzPermittivity:
    """Single-resonance Lorentz model eps = 1 + wp^2 / (wT^2 - w^2 - i gL w).

    Causal and Kramers-Kronig consistent by construction; passive for gamma >= 0.
    """
    omega_p: float
    omega_t: float
    gamma: float

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError("passivity violated: Lorentz damping must be >= 0")
        if self.omega_t < 0 or self.omega_p < 0:
            raise ValueError("Lorentz frequencies must be non-negative")

    def __call__(self, omega):
        w = np.asarray(omega, dtype=complex)
        out = 1.0 + self.omega_p**2 / (self.omega_t**2 - w**2 - 1j * self.gamma * w)
        return complex(out) if out.ndim == 0 else out

    def to_dict(self):
        return {"kind": "lorentz", "omega_p": self.omega_p, "omega_t": self.omega_t,
                "gamma": self.gamma}


Permittivity = Union[ConstPermittivity, LorentzPermittivity]


def permittivity_from_dict(d) -> Permittivity:
    kind = d.get("kind")
    if kind == "const":
        return ConstPermittivity(complex(float(d.get("re", 1.0)), float(d.get("im", 0.0))))
    if kind == "lorentz":
        for key in ("omega_p", "omega_t", "gamma"):
            if key not in d:
                raise ValueError(f"lorentz permittivity is missing key '{key}'")
        return LorentzPermittivity(float(d["omega_p"]), float(d["omega_t"]), float(d["gamma"]))
    raise ValueError(f"unknown permittivity kind {kind!r} (expected 'const' or 'lorentz')")


# ---------------------------------------------------------------------------
# stack

@dataclass(frozen=True)
class Layer:
    thickness: float
    permittivity: Permittivity = field(default_factory=ConstPermittivity)


@dataclass(frozen=True)
class LayerStack:
    """Four regions: 0 (mirror), 1 (cavity, thickness l), 2 (mirror plate), 3 (free space).

    Thicknesses of regions 0 and 3 are ignored (both are semi-infinite).  With
    ``perfect_mirror`` the left boundary of region 1 has r_{1/0} = -1 exactly.
    """
    layers: tuple
    perfect_mirror: bool = True

    def __post_init__(self):
        if len(self.layers) != 4:
            raise ValueError("a stack needs exactly 4 regions (0..3)")
        object.__setattr__(self, "layers", tuple(self.layers))
        if not self.layers[1].thickness > 0:
            raise ValueError("cavity length d_1 must be > 0")
        if self.layers[2].thickness < 0:
            raise ValueError("mirror thickness d_2 must be >= 0")

    @property
    def length(self) -> float:
        return float(self.layers[1].thickness)

    def thickness(self, j: int) -> float:
        return float(self.layers[j].thickness) if j in (1, 2) else 0.0

    def eps(self, j: int, omega):
        return self.layers[j].permittivity(omega)

    def n(self, j: int, omega):
        return np.sqrt(self.eps(j, omega))

    def beta(self, j: int, omega):
        return np.sqrt(self.eps(j, omega)) * omega / C_LIGHT

    def is_absorbing(self, j: int, omega: float) -> bool:
        return complex(self.eps(j, omega)).imag > 0

    def to_dict(self):
        return {"perfect_mirror": self.perfect_mirror,
                "layers": [{"thickness": lay.thickness, "permittivity": lay.permittivity.to_dict()}
                           for lay in self.layers]}

    @classmethod
    def from_dict(cls, d) -> "LayerStack":
        if "layers" not in d:
            raise ValueError("stack description is missing key 'layers'")
        layers = []
        for i, ld in enumerate(d["layers"]):
            if "permittivity" not in ld:
                raise ValueError(f"layers[{i}] is missing key 'permittivity'")
            th = ld.get("thickness", 0.0)
            layers.append(Layer(float(th) if th is not None else 0.0,
                                permittivity_from_dict(ld["permittivity"])))
        return cls(tuple(layers), bool(d.get("perfect_mirror", True)))


def load_stack(path) -> LayerStack:
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"stack file not found: {p}")
    return LayerStack.from_dict(json.loads(p.read_text()))


def slab_stack(length, eps_mirror, mirror_thickness, eps_inside=1.0, eps_outside=1.0,
               perfect_mirror=True) -> LayerStack:
    """Convenience constructor: perfect mirror | interior | slab | outside."""
    def perm(e):
        return e if isinstance(e, (ConstPermittivity, LorentzPermittivity)) else ConstPermittivity(complex(e))
    return LayerStack((Layer(0.0, ConstPermittivity(1.0)), Layer(length, perm(eps_inside)),
                       Layer(mirror_thickness, perm(eps_mirror)), Layer(0.0, perm(eps_outside))),
                      perfect_mirror)


# ---------------------------------------------------------------------------
# interface coefficients

def _fresnel(ba, bb):
    return (ba - bb) / (ba + bb), 2 * ba / (ba + bb)


def _composite(beta, d, path, perfect_left):
    """Reflection/transmission for a unit wave in region path[0] (taken as
    semi-infinite) incident towards region path[-1] through the regions in
    between.  Amplitudes are referred to the boundary of path[0] and the first
    boundary of path[-1]."""
    r, t = 0.0 + 0j, 1.0 + 0j
    last = len(path) - 1
    for k in range(last - 1, -1, -1):
        a, b = path[k], path[k + 1]
        if b == 0 and perfect_left:
            r, t = -1.0 + 0j, 0.0 + 0j
            continue
        ph = 1.0 if k + 1 == last else np.exp(1j * beta[b] * d[b])
        rab, tab = _fresnel(beta[a], beta[b])
        den = 1 + rab * r * ph**2
        r, t = (rab + r * ph**2) / den, tab * ph * t / den
    return r, t


@dataclass(frozen=True)
class CoeffTable:
    """Coefficients at one (complex) frequency.

    ``r_to0[j]``, ``r_to3[j]`` are r_{j/0} and r_{j/3} (region j semi-infinite,
    looking left / right); ``t_to3[j]`` is the amplitude transmitted into
    region 3 for a unit right-going wave at the right boundary of region j.
    ``pairs`` maps (a, b) -> (r, t) for a unit wave incident from region a
    towards region b; reciprocity reads t[(a,b)] = (beta_a/beta_b) t[(b,a)].
    """
    omega: complex
    beta: np.ndarray
    d: np.ndarray
    r_to0: np.ndarray
    r_to3: np.ndarray
    t_to3: np.ndarray
    D: np.ndarray
    pairs: dict

    def r(self, a, b):
        return self.pairs[(a, b)][0]

    def t(self, a, b):
        return self.pairs[(a, b)][1]

    @property
    def r10(self):
        return self.r_to0[1]

    @property
    def r13(self):
        return self.r_to3[1]

    @property
    def t13(self):
        return self.t_to3[1]

    @property
    def r31(self):
        return self.pairs[(3, 1)][0]

    @property
    def t31(self):
        return self.pairs[(3, 1)][1]

    @property
    def D1(self):
        return self.D[1]


_PAIR_PATHS = {
    (1, 0): [1, 0], (0, 1): [0, 1],
    (1, 3): [1, 2, 3], (3, 1): [3, 2, 1],
    (0, 3): [0, 1, 2, 3], (3, 0): [3, 2, 1, 0],
    (2, 1): [2, 1], (1, 2): [1, 2],
    (2, 3): [2, 3], (3, 2): [3, 2],
}


def coefficients(stack: LayerStack, omega) -> CoeffTable:
    omega = complex(omega)
    if omega == 0:
        raise ValueError("omega must be nonzero")
    eps = np.array([complex(stack.eps(j, omega)) for j in range(4)])
    if np.any(eps == 0):
        raise ValueError(f"degenerate permittivity (eps = 0) at omega = {omega}")
    beta = np.sqrt(eps) * omega / C_LIGHT
    d = np.array([0.0, stack.thickness(1), stack.thickness(2), 0.0])
    pm = stack.perfect_mirror

    r_to3 = np.zeros(4, complex)
    t_to3 = np.ones(4, complex)
    for j in (2, 1):
        r_to3[j], t_to3[j] = _composite(beta, d, list(range(j, 4)), pm)
    r_to0 = np.full(4, np.nan + 0j)
    for j in (1, 2, 3):
        r_to0[j] = _composite(beta, d, list(range(j, -1, -1)), pm)[0]
    D = np.ones(4, complex)
    for j in (1, 2, 3):
        D[j] = 1 - r_to0[j] * r_to3[j] * np.exp(2j * beta[j] * d[j])
    D[0] = np.nan
    pairs = {}
    for key, path in _PAIR_PATHS.items():
        if pm and path[0] == 0:
            pairs[key] = (-1.0 + 0j, 0.0 + 0j)   # field vanishes inside a perfect conductor
        else:
            pairs[key] = _composite(beta, d, path, pm)
    return CoeffTable(omega, beta, d, r_to0, r_to3, t_to3, D, pairs)


def transfer_matrix_rt(stack: LayerStack, omega, direction="left"):
    """Independent 2x2 transfer-matrix evaluation of the mirror (region 2)
    between regions 1 and 3.  direction='left': wave from 3 towards 1
    (returns r_{3/1}, t_{3/1}); 'right': from 1 towards 3."""
    omega = complex(omega)
    b1, b2, b3 = (complex(stack.beta(j, omega)) for j in (1, 2, 3))
    dd = stack.thickness(2)

    def M(b, x):  # field (u, u') from amplitudes (A e^{ibx}, B e^{-ibx})
        return np.array([[np.exp(1j * b * x), np.exp(-1j * b * x)],
                         [1j * b * np.exp(1j * b * x), -1j * b * np.exp(-1j * b * x)]])
    # global coordinate: slab occupies [0, dd]; region 1 at x < 0, region 3 at x > dd
    # amplitudes in region 3 referred to x = dd, region 1 referred to x = 0
    P = M(b2, dd) @ np.linalg.inv(M(b2, 0.0))   # propagates (u, u') across slab
    if direction == "right":
        # region 3 amplitudes (t, 0) at x=dd  <- region 1 (1, r) at x = 0
        A3 = np.linalg.inv(M(b3, 0.0))
        S = A3 @ P @ M(b1, 0.0)
        # [t, 0] = S [1, r]  ->  0 = S10 + S11 r
        r = -S[1, 0] / S[1, 1]
        t = S[0, 0] + S[0, 1] * r
        return r, t
    A1 = np.linalg.inv(M(b1, 0.0))
    S = A1 @ np.linalg.inv(P) @ M(b3, 0.0)
    # region 3: incident e^{-ib3 x'} (B=1) plus reflected A=r; region 1: (0, t)
    r = -S[0, 1] / S[0, 0]
    t = S[1, 0] * r + S[1, 1]
    return r, t


# ---------------------------------------------------------------------------
# Green function

@dataclass(frozen=True)
class GreenValue:
    total: complex
    bulk: complex | None = None
    scattering: complex | None = None
    incoming: complex | None = None
    outgoing: complex | None = None


def _check_pos(stack, p):
    j, z = int(p[0]), float(p[1])
    if j == 0:
        raise ValueError("positions inside region 0 (mirror) are not supported")
    if j not in (1, 2, 3):
        raise ValueError(f"region index must be 1, 2 or 3, got {j}")
    if z < 0 or (j in (1, 2) and z > stack.thickness(j) * (1 + 1e-12)):
        raise ValueError(f"z = {z} outside region {j}")
    return j, z


def _E_right(co, j, z):
    b = co.beta[j]
    return np.exp(1j * b * (z - co.d[j])) + co.r_to3[j] * np.exp(-1j * b * (z - co.d[j]))


def _E_left(co, j, z):
    b = co.beta[j]
    return np.exp(-1j * b * z) + co.r_to0[j] * np.exp(1j * b * z)


def _xi(co, j, jp):
    """Xi^{j j'} for j >= j' (written so that the perfect mirror's t_{0/3} = 0
    never enters)."""
    return (co.t_to3[jp] * np.exp(1j * co.beta[jp] * co.d[jp])
            / (co.beta[jp] * co.t_to3[j] * co.D[jp]))


def _green_from_coeffs(co, j, z, jp, zp):
    if j > jp or (j == jp and z >= zp):
        return 0.5j * _E_right(co, j, z) * _xi(co, j, jp) * _E_left(co, jp, zp)
    return 0.5j * _E_left(co, j, z) * _xi(co, jp, j) * _E_right(co, jp, zp)


def scattering_numerator(co, z, zp):
    """g(z, z', w) with G^S = g / D_1 (both points in region 1)."""
    b = co.beta[1]
    a = co.r_to3[1] * np.exp(2j * b * co.d[1])
    r = co.r_to0[1]
    return (0.5j / b) * (r * np.exp(1j * b * (z + zp)) + a * np.exp(-1j * b * (z + zp))
                         + 2 * a * r * np.cos(b * (z - zp)))


def green(stack: LayerStack, pos, pos_p, omega, coeffs: CoeffTable | None = None) -> GreenValue:
    """G(z, z', w) with z = pos = (region, local z), z' = pos_p."""
    j, z = _check_pos(stack, pos)
    jp, zp = _check_pos(stack, pos_p)
    co = coeffs if coeffs is not None else coefficients(stack, omega)
    tot = complex(_green_from_coeffs(co, j, z, jp, zp))
    bulk = scat = gin = gout = None
    if j == 1 and jp == 1:
        b = co.beta[1]
        bulk = complex(0.5j / b * np.exp(1j * b * abs(z - zp)))
        scat = complex(scattering_numerator(co, z, zp) / co.D[1])
    if j == 3:
        gin = 0j
        if jp == 3 and z < zp:
            gin = complex(0.5j / co.beta[3] * np.exp(-1j * co.beta[3] * (z - zp)))
        gout = tot - gin
    return GreenValue(tot, bulk, scat, gin, gout)


def _propagate(u, du, b, s):
    cs, sn = np.cos(b * s), np.sin(b * s)
    return u * cs + du * sn / b, -u * b * sn + du * cs


def green_wronskian(stack: LayerStack, pos, pos_p, omega):
    """Independent oracle: G = -u_<(z_<) u_>(z_>) / W, with the homogeneous
    solutions carried through the layers by continuity of u and u'."""
    omega = complex(omega)
    beta = [complex(stack.beta(j, omega)) for j in range(4)]
    x2 = stack.thickness(1)
    x3 = x2 + stack.thickness(2)
    start = {1: 0.0, 2: x2, 3: x3}

    def u_right(x):
        if x >= x3:
            e = np.exp(1j * beta[3] * (x - x3))
            return e, 1j * beta[3] * e
        u, du = 1.0 + 0j, 1j * beta[3]
        u, du = _propagate(u, du, beta[2], max(x, x2) - x3)
        if x < x2:
            u, du = _propagate(u, du, beta[1], x - x2)
        return u, du

    def u_left(x):
        if stack.perfect_mirror:
            u, du = 0.0 + 0j, 1.0 + 0j
        else:
            u, du = 1.0 + 0j, -1j * beta[0]
        u, du = _propagate(u, du, beta[1], min(x, x2))
        if x > x2:
            u, du = _propagate(u, du, beta[2], min(x, x3) - x2)
        if x > x3:
            u, du = _propagate(u, du, beta[3], x - x3)
        return u, du

    x = start[pos[0]] + pos[1]
    xp = start[pos_p[0]] + pos_p[1]
    lo, hi = min(x, xp), max(x, xp)
    ul, dul = u_left(lo)
    ur, dur = u_right(lo)
    W = ul * dur - dul * ur
    return complex(-ul * u_right(hi)[0] / W)


def far_field_amplitude(co, pos):
    """A(z) = lim_{z'->inf} G(z, z') exp(-i beta_3 z') for a source at z' in region 3."""
    j, z = pos
    return 0.5j * _E_left(co, j, z) * _xi(co, 3, j)


# ---------------------------------------------------------------------------
# identities

@dataclass(frozen=True)
class GreenIdentityReport:
    omega: float
    sum_rule_volume: complex
    sum_rule_radiation: complex
    sum_rule_lhs: complex
    sum_rule_rhs: float
    sum_rule_residual: float
    outgoing_lhs: complex | None
    outgoing_rhs: complex | None
    outgoing_residual: float | None
    quad_error: float
    converged: bool


def _quad_complex(f, a, b, epsrel, limit=400):
    # a coarse pass sets the absolute floor, so a vanishing real or imaginary
    # part does not stall the relative criterion
    rough = integrate.quad(f, a, b, limit=limit, complex_func=True)[0]
    floor = max(epsrel * abs(rough), 1e-300)
    val, err = integrate.quad(f, a, b, epsabs=floor, epsrel=epsrel, limit=limit, complex_func=True)
    return complex(val), float(abs(err))


def verify_green_identities(stack: LayerStack, pos1, pos2, omega: float, z_out: float = 0.0,
                            epsrel: float = 1e-12) -> GreenIdentityReport:
    """Check the absorption sum rule
        (w^2/c^2) int dz eps''(z) G(z1, z) G*(z2, z) = Im G(z1, z2)
    and the outgoing identity
        (w^2/c^2) int dz' eps''(z') G_out(z, z') G*(zA, z') = -(i/2) G^{(31)}(z, zA)
    with z = (3, z_out) and zA = pos1 (must lie in region 1 for the second check).

    Region 3 is taken lossless; its contribution is the eps'' -> 0+ limit of the
    semi-infinite integral, which is the outgoing radiation term k n3 A1 A2*.
    """
    omega = float(omega)
    if not omega > 0:
        raise ValueError("identities are checked at real omega > 0")
    p1, p2 = _check_pos(stack, pos1), _check_pos(stack, pos2)
    if stack.is_absorbing(3, omega):
        raise ValueError("region 3 must be lossless (free space) for the identity check")
    co = coefficients(stack, omega)
    k2 = (omega / C_LIGHT) ** 2
    absorbing = [j for j in (1, 2) if stack.is_absorbing(j, omega) and stack.thickness(j) > 0]
    vol = 0j
    qerr = 0.0
    for j in absorbing:
        epp = complex(stack.eps(j, omega)).imag

        def f(z, j=j, epp=epp):
            return epp * _green_from_coeffs(co, *p1, j, z) * np.conj(_green_from_coeffs(co, *p2, j, z))
        v, e = _quad_complex(f, 0.0, stack.thickness(j), epsrel)
        vol += k2 * v
        qerr += k2 * e
    k3 = omega * complex(stack.n(3, omega)).real / C_LIGHT
    rad = k3 * far_field_amplitude(co, p1) * np.conj(far_field_amplitude(co, p2))
    lhs = vol + rad
    rhs = complex(_green_from_coeffs(co, *p1, *p2)).imag
    scale = max(abs(rhs), abs(vol), abs(rad), 1e-300)
    res = abs(lhs - rhs) / scale

    out_lhs = out_rhs = out_res = None
    if p1[0] == 1:
        zo = (3, float(z_out))
        ovol = 0j
        for j in absorbing:
            epp = complex(stack.eps(j, omega)).imag

            def g(z, j=j, epp=epp):
                return epp * _green_from_coeffs(co, 3, zo[1], j, z) * np.conj(_green_from_coeffs(co, *p1, j, z))
            v, e = _quad_complex(g, 0.0, stack.thickness(j), epsrel)
            ovol += k2 * v
            qerr += k2 * e
        b3 = co.beta[3]
        B = 0.5j / b3 * co.r_to0[3] * np.exp(1j * b3 * zo[1])   # far-field of G_out in z'
        out_lhs = complex(ovol + k3 * B * np.conj(far_field_amplitude(co, p1)))
        out_rhs = complex(-0.5j * _green_from_coeffs(co, 3, zo[1], *p1))
        out_res = abs(out_lhs - out_rhs) / max(abs(out_rhs), 1e-300)
    converged = qerr <= max(1e-9 * scale, 1e-300) if absorbing else True
    return GreenIdentityReport(omega, complex(vol), complex(rad), complex(lhs), rhs, float(res),
                               out_lhs, out_rhs, out_res, float(qerr), bool(converged))


# ---------------------------------------------------------------------------
# pole expansion

def pole_expansion(stack: LayerStack, modes: Sequence, z: float, zp: float, omega) -> complex:
    """w^2 G^S(z, z', w) ~ sum_k [c / (2 n1(W_k) l)] i W_k^2 g(z, z', W_k) / (w - W_k)
    for z, z' in region 1; ``modes`` carry complex ``Omega``."""
    if not modes:
        raise ValueError("pole expansion needs at least one mode")
    l = stack.length
    total = 0j
    for m in modes:
        Om = complex(m.Omega)
        co = coefficients(stack, Om)
        n1 = complex(stack.n(1, Om))
        total += C_LIGHT / (2 * n1 * l) * 1j * Om**2 * scattering_numerator(co, z, zp) / (omega - Om)
    return complex(total)


def lossless_unitarity(stack: LayerStack, omega: float) -> float:
    """|r_{3/1}|^2 + |t_{3/1}|^2 (beta-weighted when regions 1 and 3 differ)."""
    co = coefficients(stack, omega)
    w = (co.beta[1] / co.beta[3]).real
    return float(abs(co.r31) ** 2 + w * abs(co.t31) ** 2)
