"""Gaussian simulation of the offline-squeezing QND sum gate."""

import json

from ._qndsim import (
    Circuit,
    ConditionalVariance,
    DuanResult,
    EnsembleResult,
    GateParams,
    GaussianState,
    ImperfectionModel,
    LossPlacement,
    Quadrature,
    Sector,
    TransferCoefficients,
    beam_splitter,
    build_qnd_gate,
    circuit_quadrature_map,
    coherent_state,
    condition_on_x,
    conditional_variance,
    cv_sweep,
    db_to_variance,
    displace,
    duan_simon,
    finite_squeezing_map,
    gain_from_reflectivity,
    ideal_qnd_map,
    is_physical,
    loss_channel,
    max_z_score,
    min_uncertainty_eigenvalue,
    phase_rotate,
    reflectivity_from_gain,
    run_covariance,
    run_ensemble,
    squeeze,
    squeeze_parameter_from_db,
    squeezed_vacuum,
    tensor,
    transfer_coefficients,
    vacuum_state,
)
from . import _qndsim

__version__ = "0.1.0"


def evaluate_gate(gate, amplitude=10.0):
    """T_S, T_P, V_SP per sector and the Duan scan, as a dict."""
    return json.loads(_qndsim.evaluate_gate(gate, amplitude))


def scenario_defaults():
    return json.loads(_qndsim.scenario_defaults())


def reproduce_table(scenario=None, calibrate=True):
    """Compare G = 1.0 and 1.5 against the reference measurements."""
    return json.loads(_qndsim.reproduce_table(json.dumps(scenario or {}), calibrate))
