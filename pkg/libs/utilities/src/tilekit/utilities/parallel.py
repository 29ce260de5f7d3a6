import logging
import os
import typing as t
from concurrent.futures import ProcessPoolExecutor
from multiprocessing import cpu_count

from tilekit.utilities.validators import Validators

JOBS_ENVIRONMENT_VARIABLE = "TILEKIT_JOBS"

_T = t.TypeVar("_T")
_R = t.TypeVar("_R")


def resolve_jobs(jobs: t.Optional[int] = None) -> int:
    """
    Number of worker processes: an explicit value wins, then the TILEKIT_JOBS environment
    variable, then the number of available cores.
    """
    if jobs is not None:
        return Validators.Integers.greater_than_zero(jobs, "jobs")
    from_environment = os.environ.get(JOBS_ENVIRONMENT_VARIABLE)
    if from_environment:
        try:
            value = int(from_environment)
        except ValueError:
            raise ValueError(
                f"Parameter {JOBS_ENVIRONMENT_VARIABLE} must be an int, got {from_environment!r}"
            )
        return Validators.Integers.greater_than_zero(value, JOBS_ENVIRONMENT_VARIABLE)
    return cpu_count()


def ordered_map(
    func: t.Callable[[_T], _R], items: t.Iterable[_T], jobs: t.Optional[int] = 1
) -> t.List[_R]:
    """
    Applies func to every item and returns the results in the order of the items.

    With a single job everything runs in this process, which is the reference behaviour
    and the easiest to debug. Otherwise the items are farmed out to a process pool; func
    and the items must then be picklable. Results are always collected in submission order
    so any reduction over them is deterministic.
    """
    items = list(items)
    workers = min(resolve_jobs(jobs), max(len(items), 1))
    if workers == 1:
        return [func(item) for item in items]
    logging.getLogger(__name__).debug(
        f"Mapping {len(items)} items over {workers} worker processes"
    )
    with ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, items))
