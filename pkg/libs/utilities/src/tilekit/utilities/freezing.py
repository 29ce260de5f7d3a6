from typing import Mapping

import numpy as np
from frozendict import frozendict


def freeze_recursively(value):
    """
    Recursively walks ``Mapping``s, ``list``s and numpy arrays and converts them to
    ``frozendict``s and ``tuple``s respectively, so parameter sets can be hashed and
    stored on frozen attrs classes.
    """
    if isinstance(value, Mapping):
        return frozendict(((k, freeze_recursively(v)) for k, v in value.items()))
    elif isinstance(value, (list, tuple)):
        return tuple(freeze_recursively(v) for v in value)
    elif isinstance(value, np.ndarray):
        return tuple(freeze_recursively(v) for v in value.tolist())
    elif isinstance(value, np.generic):
        return value.item()
    return value


def unfreeze_recursively(value):
    """
    Returns frozen dicts to dicts and tuples to lists because eg json encoders do not
    understand frozen dicts
    """
    if isinstance(value, Mapping):
        return dict(((k, unfreeze_recursively(v)) for k, v in value.items()))
    elif isinstance(value, (list, tuple)):
        return [unfreeze_recursively(v) for v in value]
    return value
