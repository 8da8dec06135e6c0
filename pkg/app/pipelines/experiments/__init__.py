"""Experiment handlers, one per config kind."""
from typing import Dict

from app.pipelines.experiments.base import ExperimentHandler
from app.pipelines.experiments.basic_equivariance import BasicEquivarianceHandler
from app.pipelines.experiments.charge_rotation import ChargeRotationHandler
from app.pipelines.experiments.clt_sweep import CltSweepHandler
from app.pipelines.experiments.downsample_nonequivariance import DownsampleNonequivarianceHandler
from app.pipelines.experiments.fourier_consistency import FourierConsistencyHandler
from app.pipelines.experiments.invariant_poly_fit import InvariantPolyFitHandler
from app.pipelines.experiments.lambda_consistency import LambdaConsistencyHandler
from app.pipelines.experiments.sn_invariance_fit import SnInvarianceFitHandler
from app.pipelines.experiments.stencil_identities import StencilIdentitiesHandler

HANDLERS: Dict[str, ExperimentHandler] = {
    handler.kind: handler
    for handler in (
        StencilIdentitiesHandler(),
        FourierConsistencyHandler(),
        CltSweepHandler(),
        SnInvarianceFitHandler(),
        BasicEquivarianceHandler(),
        DownsampleNonequivarianceHandler(),
        ChargeRotationHandler(),
        LambdaConsistencyHandler(),
        InvariantPolyFitHandler(),
    )
}


def get_handler(kind: str) -> ExperimentHandler:
    """
    Raises:
        KeyError: For an unregistered kind
    """
    if kind not in HANDLERS:
        raise KeyError(f"No handler registered for experiment kind {kind!r}")
    return HANDLERS[kind]
