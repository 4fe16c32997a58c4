"""Simulator for spontaneous emission in the single-photon subspace.

Submodules
----------
model       core containers and unit conventions
arrowhead   arrowhead / bordered-arrowhead eigensolvers
exact1d     closed-form uniform-model solution (million-oscillator scale)
box3d       3D-box mode enumeration and hydrogen 2p-1s parameters
dynamics    time propagation, phase-kick trains, two-atom runs
observables populations, spectra, angular distributions, fits, correlations
output      CSV / manifest / decomposition-cache file formats
cli         command-line front end

Submodules import numpy lazily through this package so the CLI can pin
BLAS thread counts before any numerical library loads.
"""

import importlib

__version__ = "0.1.0"

_SUBMODULES = (
    "model",
    "arrowhead",
    "exact1d",
    "box3d",
    "dynamics",
    "observables",
    "output",
    "cli",
)

__all__ = list(_SUBMODULES)


def __getattr__(name):
    if name in _SUBMODULES:
        return importlib.import_module(f".{name}", __name__)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


def __dir__():
    return sorted(list(globals()) + list(_SUBMODULES))
