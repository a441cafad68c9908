"""
Compiled hot loops.

Numba compilation can be switched off with HOLONOMY_JIT=0, in which case
the kernels run as plain Python over numpy arrays.
"""

import logging
import os

import numpy as np

logger = logging.getLogger(__name__)

JIT_ENABLED = os.environ.get('HOLONOMY_JIT', '1') != '0'

if JIT_ENABLED:
    from numba import njit, prange
else:

    def njit(func=None, **kwargs):
        if func is not None:
            return func

        def wrapper(f):
            return f

        return wrapper

    def prange(x):
        return range(x)


@njit(parallel=True, cache=False)
def max_metric_best_dots(probes_plus, probes_minus, points_plus, points_minus):
    """
    For each probe pair, the largest over orbit points of
    min(<probe+, point+>, <probe-, point->).

    The max-metric distance on S^2 x S^2 from a probe to the orbit is
    the arccos of this value.
    """
    n_probes = probes_plus.shape[0]
    n_points = points_plus.shape[0]
    best = np.empty(n_probes)
    for i in prange(n_probes):
        top = -2.0
        for j in range(n_points):
            dp = (probes_plus[i, 0] * points_plus[j, 0]
                  + probes_plus[i, 1] * points_plus[j, 1]
                  + probes_plus[i, 2] * points_plus[j, 2])
            dm = (probes_minus[i, 0] * points_minus[j, 0]
                  + probes_minus[i, 1] * points_minus[j, 1]
                  + probes_minus[i, 2] * points_minus[j, 2])
            c = dp if dp < dm else dm
            if c > top:
                top = c
        best[i] = top
    return best


def env_threads():
    """HOLONOMY_THREADS as a positive int, or None when unset or not an integer."""
    env = os.environ.get('HOLONOMY_THREADS')
    if not env:
        return None
    try:
        return max(1, int(env))
    except ValueError:
        logger.warning(f"ignoring non-integer HOLONOMY_THREADS={env!r}")
        return None


def set_threads(threads=None):
    """Cap numba's worker pool: the explicit value, else HOLONOMY_THREADS, else the default."""
    if threads is None:
        threads = env_threads()
    if threads is None or not JIT_ENABLED:
        return
    import numba
    numba.set_num_threads(max(1, min(int(threads), numba.config.NUMBA_NUM_THREADS)))
    logger.debug(f"numba threads set to {numba.get_num_threads()}")
