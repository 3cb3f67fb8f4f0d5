from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import TYPE_CHECKING, Callable, NamedTuple

import numpy as np

if TYPE_CHECKING:
    from .result import CapacityOptions

logger = logging.getLogger(__name__)


class RestartOutcome(NamedTuple):
    """What a single restart reports back to the runner."""

    value: float
    iterations: int
    converged: bool
    payload: object


def run_restarts(
    task: Callable[[int, np.random.Generator], RestartOutcome],
    opts: CapacityOptions,
) -> list[RestartOutcome]:
    """Run ``task(index, rng)`` for every restart, in restart order.

    Every restart gets its own generator spawned from ``opts.seed``, so the
    outcomes do not depend on whether they run sequentially or on a thread
    pool of ``opts.n_workers`` threads.
    """
    children = np.random.SeedSequence(opts.seed).spawn(opts.restarts)
    generators = [np.random.default_rng(child) for child in children]
    if opts.n_workers == 1:
        return [task(index, rng) for index, rng in enumerate(generators)]
    with ThreadPoolExecutor(max_workers=opts.n_workers) as executor:
        futures = [
            executor.submit(task, index, rng) for index, rng in enumerate(generators)
        ]
        return [future.result() for future in futures]


def select_best(
    outcomes: list[RestartOutcome], maximize: bool = True
) -> tuple[int, tuple[float, ...]]:
    """Index of the best outcome and the running best after each restart.

    Ties go to the lowest restart index.
    """
    sign = 1.0 if maximize else -1.0
    best_index = 0
    history = []
    for index, outcome in enumerate(outcomes):
        if sign * outcome.value > sign * outcomes[best_index].value:
            best_index = index
        history.append(outcomes[best_index].value)
        logger.debug(
            "Restart %d: value %.12f after %d iterations (%s)",
            index,
            outcome.value,
            outcome.iterations,
            "converged" if outcome.converged else "not converged",
        )
    return best_index, tuple(history)
