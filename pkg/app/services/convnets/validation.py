"""Spec validation with per-layer grid schedules."""
from typing import Any, Dict, List, Union

from pydantic import ValidationError

from app.core.logging import logger
from app.schemas.convnet import BasicConvNetSpec, DownsampledConvNetSpec, SpecReport, downsampled_ranges


ConvNetSpec = Union[BasicConvNetSpec, DownsampledConvNetSpec]


def _messages(error: ValidationError) -> List[str]:
    messages = []
    for item in error.errors():
        msg = item["msg"]
        if msg.startswith("Value error, "):
            messages.extend(msg[len("Value error, "):].split("; "))
        else:
            loc = ".".join(str(part) for part in item["loc"])
            messages.append(f"{loc}: {msg}" if loc else msg)
    return messages


def _raw_schedule(data: Dict[str, Any]) -> List[int]:
    """Best-effort schedule from unvalidated fields; empty when they are unusable."""
    try:
        depth = len(data.get("layers", [])) + 1
        L = int(data["receptive_field"])
        if "stride" in data:
            return downsampled_ranges(L, int(data["stride"]), depth)
        out = int(float(data["extent"]) / float(data["spacing"]) + 1e-9)
        return [out + (depth - t) * L for t in range(1, depth + 1)]
    except (KeyError, TypeError, ValueError, ZeroDivisionError):
        return []


def _spacings(spec: ConvNetSpec) -> List[float]:
    stride = getattr(spec, "stride", 1)
    return [spec.spacing * stride ** t for t in range(spec.depth)]


def validate_spec(spec: Union[ConvNetSpec, Dict[str, Any]]) -> SpecReport:
    """
    Check shape and range invariants and report the grid schedule.

    Accepts a constructed spec or its raw field mapping; a mapping with a
    ``stride`` key is read as a downsampled spec. Never raises.

    Returns:
        SpecReport with ``ok``, one diagnostic per problem and the half-widths
        of W_1..W_T
    """
    if isinstance(spec, (BasicConvNetSpec, DownsampledConvNetSpec)):
        return SpecReport(ok=True, schedule=spec.schedule(), spacings=_spacings(spec))
    model = DownsampledConvNetSpec if "stride" in spec else BasicConvNetSpec
    try:
        built = model.model_validate(spec)
    except ValidationError as e:
        diagnostics = _messages(e)
        logger.info(f"Validator: {model.__name__} rejected with {len(diagnostics)} diagnostic(s)")
        return SpecReport(ok=False, diagnostics=diagnostics, schedule=_raw_schedule(spec))
    return SpecReport(ok=True, schedule=built.schedule(), spacings=_spacings(built))
