import cmath
import math
import warnings

import pytest
from hypothesis import assume, given, strategies as st

from cavity_emission.emission import efficiency_numeric, default_grid
from cavity_emission.modes import (AtomConfig, D1, RegimeError, RootNotConverged, find_resonances,
                                   frequency_shift, frequency_shift_pv, mode_constants, polish_root,
                                   reduced_mode, shift_pv_single, zeta_of)
from cavity_emission.multilayer import coefficients, slab_stack
from conftest import nearest


# --- resonances ---------------------------------------------------------------

def test_roots_are_zeros(lorentz_stack, lorentz_modes):
    assert len(lorentz_modes) == 6
    for m in lorentz_modes:
        assert abs(D1(lorentz_stack, m.Omega)) <= 1e-12
        assert m.Omega.imag < 0


def test_band_narrower_than_fsr_rejected(lossless_stack):
    with pytest.raises(ValueError):
        find_resonances(lossless_stack, (94.0, 95.0))


def test_closed_cavity_limit():
    """Thin, highly reflecting slabs: w_k -> k pi c/l and Gamma_k -> 0."""
    prev_g, prev_dw = None, None
    for eps, d in ((1e4, 1e-5), (1e6, 1e-6), (1e8, 1e-7)):
        m = nearest(find_resonances(slab_stack(1.0, eps, d), (90.0, 98.0)), 94.25)
        dw = abs(m.omega_k - 30 * math.pi)
        if prev_g is not None:
            assert m.Gamma < prev_g / 50 and dw < prev_dw / 5
        prev_g, prev_dw = m.Gamma, dw
    assert prev_g < 1e-5 and prev_dw < 2e-3


def test_constant_reflection_width():
    """Scalar root of 1 + r exp(2 i W l/c) = 0 with r = -0.95."""
    r = -0.95
    root = polish_root(lambda W: 1 + r * cmath.exp(2j * W), complex(30 * math.pi, -0.01))
    assert abs(-2 * root.imag - math.log(1 / 0.95)) < 1e-12
    assert abs(math.log(1 / 0.95) - 0.05129) < 1e-5


def test_polish_root_failure():
    with pytest.raises(RootNotConverged):
        polish_root(lambda z: 1.0 + 0 * z, 1.0 + 0j, maxiter=5)


def test_absorption_adds_width(lorentz_stack):
    """Lorentz mirror vs a lossless twin with the same Re eps near the line."""
    w = 94.25
    re_eps = complex(lorentz_stack.eps(2, w)).real
    twin = slab_stack(1.0, re_eps, lorentz_stack.thickness(2))
    ml = nearest(find_resonances(lorentz_stack, (85, 105)), w)
    mt = nearest(find_resonances(twin, (85, 105)), w)
    co_l, co_t = coefficients(lorentz_stack, ml.omega_k), coefficients(twin, mt.omega_k)
    assert abs(abs(co_l.r13) - abs(co_t.r13)) < 1e-3      # comparable mirror reflectivity
    assert ml.Gamma > mt.Gamma


# --- mode constants ------------------------------------------------------------

def test_antinode_alpha(lossless_stack, lossless_modes):
    m = nearest(lossless_modes, 94.25)
    zA = math.pi / 2 / m.omega_k            # first antinode
    atom = AtomConfig(omega0=m.omega_k, z_A=zA, coupling=1e-5)
    mc = mode_constants(lossless_stack, m, atom)
    assert abs(mc.alpha - 4 * 1e-5 / lossless_stack.length) < 1e-12


def test_lossless_gamma_rad_equals_width(lossless_stack, lossless_modes):
    tested = 0
    for m in lossless_modes:
        if abs(coefficients(lossless_stack, m.omega_k).t13) ** 2 > 0.01:
            continue
        mc = mode_constants(lossless_stack, m, AtomConfig(m.omega_k, 0.25, 1e-5))
        assert abs(mc.gamma_rad / mc.Gamma - 1) < 0.01
        tested += 1
    assert tested >= 3


def test_absorbing_mirror_gamma_rad_below_width(lorentz_stack, lorentz_modes):
    m = nearest(lorentz_modes, 94.25)
    mc = mode_constants(lorentz_stack, m, AtomConfig(m.omega_k, 0.25, 1e-5))
    assert mc.gamma_rad < mc.Gamma


def test_kappa_identity_stack(lossless_stack, lossless_modes):
    m = nearest(lossless_modes, 94.25)
    mc = mode_constants(lossless_stack, m, AtomConfig(m.omega_k, 0.25, 6.6e-6))
    assert abs(abs(mc.kappa) ** 2 / (mc.R ** 2 * mc.gamma_rad / (2 * math.pi)) - 1) < 1e-10


@given(g=st.floats(0.05, 1.0), d=st.floats(-3, 3), R=st.floats(0.1, 50), w=st.floats(1e3, 1e9))
def test_kappa_identity_reduced(g, d, R, w):
    try:
        m, _ = reduced_mode(g, d, R, w)
    except RegimeError:
        assume(False)
    assert abs(abs(m.kappa) ** 2 / (m.R ** 2 * m.gamma_rad / (2 * math.pi)) - 1) < 1e-10


def test_node_warns(lossless_stack, lossless_modes):
    m = nearest(lossless_modes, 94.25)
    with pytest.warns(RuntimeWarning):
        mode_constants(lossless_stack, m, AtomConfig(m.omega_k, 0.0 + 1e-300, 0.0))


def test_atom_outside_cavity_rejected(lossless_stack, lossless_modes):
    with pytest.raises(ValueError):
        mode_constants(lossless_stack, lossless_modes[0], AtomConfig(90.0, 1.5, 1e-5))


# --- reduced mode ---------------------------------------------------------------

def test_fig2_zeta(fig2):
    m, _ = fig2
    ref = cmath.sqrt((0.1 - 0.5j) ** 2 + (100 / 2e8) * complex(2e8, -0.5))
    assert abs(m.zeta - ref) < 1e-12
    assert abs(m.zeta - cmath.sqrt((0.1 - 0.5j) ** 2 + 100)) < 1e-7
    assert abs(m.rho - 9.9880) < 1e-4
    assert abs(m.gamma - 0.01001) < 1e-5
    assert m.gamma_rad == pytest.approx(0.9)


def test_zero_rabi_decoupled():
    m, atom = reduced_mode(0.9, 0.1, 0.0, 2e8)
    assert m.alpha == 0 and m.kappa == 0 and atom.coupling == 0


def test_superstrong_rejected():
    # gamma_k >= Gamma_k happens for coupling comparable to the line frequency
    with pytest.raises(RegimeError):
        reduced_mode(0.9, 0.0, 4.0, 1.0)


@given(g=st.floats(0.05, 1.0), d=st.floats(-20, 20), R=st.floats(0, 100), w=st.floats(10, 1e9))
def test_zeta_branch(g, d, R, w):
    z = zeta_of(R ** 2 / w, complex(w, -0.5), complex(d, -0.5))
    assert z.real >= 0


def test_eta_inf_two_ways(fig2):
    m, atom = fig2
    dw = default_grid(m, 200 * m.rho, 2 ** 17)
    assert abs(efficiency_numeric(m, atom, 50.0, dw=dw) / m.eta_inf - 1) < 1e-3


# --- frequency shift ------------------------------------------------------------

def _stack_modes(stack, modes, coupling):
    sel = 2
    atom = AtomConfig(omega0=modes[sel].omega_k, z_A=0.25, coupling=coupling)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return [mode_constants(stack, m, atom) for m in modes], atom, sel


def test_shift_zero_coupling(lossless_stack, lossless_modes):
    full, atom, sel = _stack_modes(lossless_stack, lossless_modes, 0.0)
    assert frequency_shift(full, atom, sel) == 0.0


def test_shift_closed_form_vs_pv(lossless_stack, lossless_modes):
    full, atom, sel = _stack_modes(lossless_stack, lossless_modes, 6.6e-6)
    for i, m in enumerate(full):
        if i == sel:
            continue
        closed = frequency_shift([full[sel], m], atom, 0)
        pv = shift_pv_single(m, atom.omega_tilde0)
        assert abs(closed - pv) <= 0.01 * abs(pv)
    tot = frequency_shift(full, atom, sel)
    assert abs(tot - frequency_shift_pv(full, atom, sel)) <= 0.01 * abs(tot)
    # negligible against the line width
    assert abs(tot) < 1e-2 * full[sel].Gamma


def test_pv_refuses_on_line(lossless_stack, lossless_modes):
    full, atom, sel = _stack_modes(lossless_stack, lossless_modes, 6.6e-6)
    with pytest.raises(ValueError):
        shift_pv_single(full[sel], atom.omega_tilde0)
