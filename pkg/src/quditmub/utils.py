# -*- coding: utf-8 -*-
# ---
# jupyter:
#   jupytext:
#     notebook_metadata_filter: -jupytext.text_representation.jupytext_version,-kernelspec
#     text_representation:
#       extension: .py
#       format_name: light
#       format_version: '1.5'
# ---

# # Utilities for the quditmub library

from __future__ import annotations

import os
import logging
from fractions import Fraction
from multiprocessing.pool import ThreadPool
from collections.abc import Callable, Iterable, Sequence
from typing import Literal, Optional, Union

import numpy as np
import psutil
from tqdm.auto import tqdm

from scityping.numpy import Array
from numpy.typing import ArrayLike

from .config import config

logger = logging.getLogger(__name__)

__all__ = ["DimensionMismatchError", "NotDnaryError", "NotMonomialError",
           "NotDnaryPhaseError", "NonUnitaryError", "NotTracePreservingError",
           "NotCharacterizableError", "ResourceLimitError",
           "worker_count", "parallel_map", "get_progbar",
           "complex_to_json", "matrix_to_json", "matrix_from_json",
           "fraction_to_json"]

# ## Exceptions
#
# Each error kind is a subclass of the built-in exception one would otherwise
# raise, so `except ValueError` keeps working for callers.

class DimensionMismatchError(ValueError):
    pass

class NotDnaryError(ValueError):
    pass

class NotMonomialError(ValueError):
    pass

class NotDnaryPhaseError(NotMonomialError):
    pass

class NonUnitaryError(ValueError):
    pass

class NotTracePreservingError(ValueError):
    pass

class NotCharacterizableError(ValueError):
    pass

class ResourceLimitError(RuntimeError):
    pass


# ## Parallel map
#
# All parallel work in this package consists of numpy-heavy, independent
# items (one basis element, one family, one chunk of Monte Carlo samples).
# Threads are sufficient since numpy releases the GIL, and results are
# returned in input order so outputs never depend on scheduling.

def worker_count(n_items: Optional[int]=None) -> int:
    """
    Number of worker threads to use.
    Capped by the number of physical cores, `config.mp.max_cores`, the
    environment variable ``QUDIT_MUB_THREADS`` (read at call time), and
    `n_items` when given.
    """
    ncores = psutil.cpu_count(logical=False) or 1
    ncores = min(ncores, config.mp.max_cores)
    env = os.environ.get("QUDIT_MUB_THREADS")
    if env:
        try:
            ncores = min(ncores, max(int(env), 1))
        except ValueError:
            logger.warning(f"Ignoring QUDIT_MUB_THREADS={env!r}: not an integer.")
    if n_items is not None:
        ncores = min(ncores, max(n_items, 1))
    return ncores

def parallel_map(func: Callable, items: Sequence,
                 progbar: Union[Literal["auto"],None,tqdm]=None,
                 desc: str="") -> list:
    """
    Ordered ``[func(x) for x in items]``, dispatched over a thread pool.

    Parameters
    ----------
    progbar: Control whether to create progress bar or use an existing one.
       - With the value 'auto', a new tqdm progress bar is created.
       - An existing tqdm progress bar is updated but not closed.
       - With `None` (default), no progress bar is shown.
    """
    items = list(items)
    progbar, close_progbar = get_progbar(progbar, desc=desc, total=len(items))
    ncores = worker_count(len(items))
    results = []
    try:
        if ncores == 1:
            for x in items:
                results.append(func(x))
                if progbar is not None: progbar.update(1)
        else:
            chunksize, extra = divmod(len(items), ncores*4)
            if extra:
                chunksize += 1
            with ThreadPool(ncores) as pool:
                for r in pool.imap(func, items, chunksize=chunksize):
                    results.append(r)
                    if progbar is not None: progbar.update(1)
    finally:
        if close_progbar: progbar.close()
    return results

def get_progbar(progbar: Union[Literal["auto"],None,tqdm], desc: str="",
                total: Optional[int]=None) -> tuple[Optional[tqdm], bool]:
    """
    Return ``(progbar, close_progbar)``: the bar to update, and whether we
    created it (and therefore should close it).
    """
    if progbar == "auto":
        return tqdm(desc=desc, total=total), True
    elif isinstance(progbar, tqdm):
        if total is not None and progbar.total is None:
            progbar.total = total
        return progbar, False
    elif progbar is None:
        return None, False
    else:
        raise TypeError("`progbar` must be either 'auto', None or a tqdm instance; "
                        f"received {type(progbar)}.")


# ## JSON helpers
#
# Complex numbers are written as ``[re, im]`` pairs, matrices as lists of rows.

def complex_to_json(z: complex) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]

def matrix_to_json(m: ArrayLike) -> list[list[list[float]]]:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]

def matrix_from_json(rows: Iterable) -> Array[complex,2]:
    """
    Inverse of `matrix_to_json`. Entries may also be plain real numbers.
    """
    def entry(z):
        if isinstance(z, (list, tuple)):
            if len(z) != 2:
                raise ValueError(f"Complex entries must be [re, im] pairs; received {z}.")
            return complex(float(z[0]), float(z[1]))
        return complex(float(z))
    m = np.array([[entry(z) for z in row] for row in rows], dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"Expected a square matrix; received shape {m.shape}.")
    if not np.all(np.isfinite(m)):
        raise ValueError("Matrix contains non-finite entries.")
    return m

def fraction_to_json(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"
