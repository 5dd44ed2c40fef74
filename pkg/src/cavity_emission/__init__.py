"""Single-photon emission from an atom in a leaky, absorbing one-dimensional
cavity: multilayer Green function, cavity modes, atomic dynamics, outgoing
field and its quantum-noise-theory counterparts."""
from .multilayer import (C_LIGHT, UNITS, ConstPermittivity, Layer, LayerStack, LorentzPermittivity,
                         coefficients, green, load_stack, slab_stack, verify_green_identities)
from .modes import (AtomConfig, RegimeError, ResonantMode, find_resonances, frequency_shift,
                    mode_constants, reduced_mode)
from .dynamics import c2_analytic, c2_volterra
from .emission import (CONTINUING, SHORT_TERM, efficiency, f_spectrum, pulse, quantum_state,
                       spectrum)

__version__ = "0.1.0"

__all__ = [
    "C_LIGHT", "UNITS", "ConstPermittivity", "Layer", "LayerStack", "LorentzPermittivity",
    "coefficients", "green", "load_stack", "slab_stack", "verify_green_identities",
    "AtomConfig", "RegimeError", "ResonantMode", "find_resonances", "frequency_shift",
    "mode_constants", "reduced_mode", "c2_analytic", "c2_volterra", "CONTINUING", "SHORT_TERM",
    "efficiency", "f_spectrum", "pulse", "quantum_state", "spectrum", "__version__",
]
