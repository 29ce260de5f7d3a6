"""
The symmetry actions T_y, M_xi and D^p_lambda on grid functions. Every action is exact on
the lattice: translations by sample multiples, modulations by frequency lattice points,
and dilations by powers of two (which move the function onto the dilated grid).
"""
import typing as t

import attr
import numpy as np

from tilekit.fourier.grid import GridFunction, GridSpec, Representation
from tilekit.utilities.validators import Validators


def _lattice_steps(values, unit: np.ndarray, name: str) -> t.Tuple[int, ...]:
    values = np.asarray(values, dtype=float)
    if values.shape != unit.shape:
        raise ValueError(f"Parameter {name} must have {unit.size} components")
    steps = values / unit
    rounded = np.rint(steps)
    if not np.all(steps == rounded):
        raise ValueError(f"Parameter {name} must lie on the lattice")
    return tuple(int(s) for s in rounded)


def _phase(
    grid: GridSpec, steps: t.Sequence[int], sign: int, frequency: bool
) -> np.ndarray:
    """
    exp(sign 2 pi i sum_i j_i s_i / N_i) over sample (or frequency) indices j, evaluated
    with the exact residue (j_i s_i mod N_i).
    """
    phase = np.ones((), dtype=complex)
    for axis, (s, size) in enumerate(zip(steps, grid.shape)):
        if frequency:
            m = grid.axis_frequency_indices(axis)
        else:
            m = np.arange(size, dtype=np.int64)
        residue = np.mod(m * s, size)
        phase = np.multiply.outer(phase, np.exp(sign * 2j * np.pi * residue / size))
    return phase


@attr.s(frozen=True)
class Translate:
    """T_y f(x) = f(x - y), circular on the window."""

    y = attr.ib(converter=lambda v: tuple(float(c) for c in v))

    def apply(self, f: GridFunction) -> GridFunction:
        steps = _lattice_steps(self.y, f.grid.spacings, "y")
        if f.representation is Representation.PHYSICAL:
            samples = np.roll(f.samples, steps, axis=tuple(range(f.grid.n)))
        else:
            samples = f.samples * _phase(f.grid, steps, -1, frequency=True)
        return GridFunction(f.grid, samples, f.representation, f.metadata)


@attr.s(frozen=True)
class Modulate:
    """M_xi f(x) = exp(2 pi i x . xi) f(x)."""

    xi = attr.ib(converter=lambda v: tuple(float(c) for c in v))

    def apply(self, f: GridFunction) -> GridFunction:
        steps = _lattice_steps(self.xi, 1.0 / f.grid.lengths, "xi")
        if f.representation is Representation.FREQUENCY:
            samples = np.roll(f.samples, steps, axis=tuple(range(f.grid.n)))
        else:
            samples = f.samples * _phase(f.grid, steps, 1, frequency=False)
        return GridFunction(f.grid, samples, f.representation, f.metadata)


@attr.s(frozen=True)
class Dilate:
    """
    D^p_lambda f(x) = lambda^{-|alpha| / p} f(delta_{lambda^{-1}} x). The result lives on
    grid.dilated(log2 lambda), whose samples sit at the dilated positions, so only the
    amplitude changes.
    """

    lam = attr.ib(converter=lambda v: Validators.Floats.greater_than_zero(v, "lam"))
    p = attr.ib(default=2)

    @p.validator
    def _check_p(self, attribute, value):
        if value not in (1, 2):
            raise ValueError("Parameter p must be 1 or 2")

    @property
    def exponent(self) -> int:
        return Validators.Floats.power_of_two(self.lam, "lam")

    def apply(self, f: GridFunction) -> GridFunction:
        j = self.exponent
        grid = f.grid.dilated(j)
        total = f.grid.alpha.total
        if f.representation is Representation.PHYSICAL:
            scale = self.lam ** (-total / self.p)
        else:
            scale = self.lam ** (total - total / self.p)
        return GridFunction(grid, f.samples * scale, f.representation, f.metadata)


SymmetryAction = t.Union[Translate, Modulate, Dilate]


def apply_symmetry(f: GridFunction, action: SymmetryAction) -> GridFunction:
    return action.apply(f)


def apply_chain(f: GridFunction, actions: t.Iterable[SymmetryAction]) -> GridFunction:
    for action in actions:
        f = action.apply(f)
    return f
