"""loewner_lab: a numerical laboratory for chordal Loewner evolution.

Simulates SLE_kappa through the Loewner differential equation (vertical
slit discretization), recovers driving functions with a discrete zipper,
computes Dirichlet/Loewner energies, verifies the deterministic
inequalities that control the solver, estimates rare-event probabilities
at small kappa, and computes variational rate functions for comparison
with measured kappa * log p slopes.
"""

__version__ = "0.1.0"

from .drivers import (
    Driver,
    dirichlet_energy,
    make_driver,
    mollify,
    oscillation,
    pwl_approximation,
    read_driver_csv,
    sample_brownian_driver,
    write_driver_csv,
)
from .forward import (
    Curve,
    MapChain,
    SingularityError,
    build_chain,
    evaluate_centered_derivative,
    evaluate_centered_map,
    evaluate_derivative,
    evaluate_map,
    read_curve_csv,
    reparam_distance,
    sup_distance,
    trace,
    write_curve_csv,
)
from .zipper import ZipperError, ZipResult, capacity_profile, zip_curve

__all__ = [
    "__version__",
    "Driver",
    "Curve",
    "MapChain",
    "ZipResult",
    "SingularityError",
    "ZipperError",
    "make_driver",
    "sample_brownian_driver",
    "pwl_approximation",
    "dirichlet_energy",
    "oscillation",
    "mollify",
    "build_chain",
    "evaluate_map",
    "evaluate_derivative",
    "evaluate_centered_map",
    "evaluate_centered_derivative",
    "trace",
    "sup_distance",
    "reparam_distance",
    "zip_curve",
    "capacity_profile",
    "read_driver_csv",
    "write_driver_csv",
    "read_curve_csv",
    "write_curve_csv",
]
