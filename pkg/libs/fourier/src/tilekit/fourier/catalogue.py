"""
Builtin multipliers by name, so that scenarios and configurations can refer to them in
plain data.
"""
import typing as t

from tilekit.fourier.multipliers import (
    MultiplierSpec,
    constant_multiplier,
    smooth_multiplier,
)
from tilekit.fourier.toy import ToyMultiplierParams, toy_multiplier
from tilekit.geometry.anisotropy import AnisoExponent


def _build_toy(alpha: AnisoExponent, **params) -> MultiplierSpec:
    variant = params.pop("variant", "full")
    toy = ToyMultiplierParams(**params)
    if tuple(alpha) != toy.alpha:
        raise ValueError(f"Toy multipliers need alpha = {toy.alpha}, got {tuple(alpha)}")
    return toy_multiplier(toy, variant)


BUILTIN_MULTIPLIERS: t.Dict[str, t.Callable[..., MultiplierSpec]] = {
    "constant": lambda alpha, **params: constant_multiplier(alpha, **params),
    "smooth": lambda alpha, **params: smooth_multiplier(alpha, **params),
    "toy": _build_toy,
}


def build_multiplier(
    name: str, alpha, params: t.Optional[t.Mapping[str, t.Any]] = None
) -> MultiplierSpec:
    try:
        factory = BUILTIN_MULTIPLIERS[name]
    except KeyError:
        raise ValueError(
            f"Unknown multiplier {name!r}, expected one of {sorted(BUILTIN_MULTIPLIERS)}"
        )
    return factory(AnisoExponent(alpha), **dict(params or {}))


def multiplier_from_record(record: t.Mapping[str, t.Any]) -> MultiplierSpec:
    return build_multiplier(record["name"], record["alpha"], record.get("params"))
