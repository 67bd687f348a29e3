# # Caching decorator
#
# Constructing an operator basis, its MUB partition or a cyclotomic reduction
# matrix is deterministic and depends only on small hashable arguments
# (dimensions), so these results are memoized with `@memoize`.
# Two backends are available, selected by `config.caching.use_disk_cache`:
# - *functools.lru_cache* (default) keeps results for the lifetime of the process.
# - *joblib.Memory* stores them on disk. This is opt-in, since a disk cache can
#   go stale when code outside the cached function changes.
#
# Both are wrapped in a "no fail" layer: when an argument cannot be hashed
# (lru_cache) or pickled (joblib), the bare function is called instead and a
# single warning is logged.

import logging
import textwrap
from collections.abc import Callable
from functools import partial, update_wrapper, WRAPPER_ASSIGNMENTS
from inspect import unwrap
from pickle import PicklingError
try:
    import joblib
except ModuleNotFoundError:
    joblib = None

from .config import config

logger = logging.getLogger(__name__)

__all__ = ["memoize", "nofail_functools_cache", "nofail_joblib_cache"]


# ## `@memoize` decorator

# +
if config.caching.use_disk_cache:
    from joblib import Memory
    memory = Memory(**config.caching.joblib.dict())
    def memoize(func=None, **kwargs):
        "@memory.cache with a fallback for unpicklable arguments."
        if func is None:
            return partial(memoize, **kwargs)
        warn = kwargs.pop("warn", True)
        return nofail_joblib_cache(warn=warn)(memory.cache(func, **kwargs))

else:
    from functools import lru_cache
    def memoize(func=None, **kwargs):
        "@lru_cache with a fallback for unhashable arguments."
        warn = kwargs.pop("warn", True)
        if func is None:
            # Remaining keyword arguments only make sense for joblib
            return partial(memoize, warn=warn)
        if not isinstance(func, Callable):
            raise TypeError("@memoize only accepts keyword arguments, or no arguments at all.")
        return nofail_functools_cache(warn=warn)(lru_cache(func))
# -


# ## `@nofail` decorators

def nofail_functools_cache(warn: bool=True):
    """
    Wrap a function memoized with `functools.lru_cache` so that calls with
    unhashable arguments fall through to the unmemoized function
    (found as ``cached_f.__wrapped__``).

    >>> @nofail_functools_cache
    ... @lru_cache
    ... def order(d):
    ...     return d**2
    >>> order(3)     # memoized
    >>> order([3])   # not memoized, does not fail
    """
    def decorator(cached_f):
        def wrapper(*args, **kwds):
            nonlocal warn
            try:
                return cached_f(*args, **kwds)
            except TypeError as e:
                # Only intercept hashing failures
                if "unhashable type" not in str(e):
                    raise
                try:
                    f = unwrap(cached_f)
                except AttributeError:
                    raise e
                if warn:
                    logger.warning(f"Calling unmemoized form of {cached_f.__name__} "
                                   "because some arguments are unhashable. "
                                   "This message will not be repeated. "
                                   "The original error message was:\n"
                                   + textwrap.indent(str(e), "  "))
                    warn = False
                return f(*args, **kwds)
        update_wrapper(wrapper, cached_f,
                       WRAPPER_ASSIGNMENTS + ("cache_info", "cache_clear"))
        return wrapper

    if isinstance(warn, Callable):
        # Used without arguments: @nofail_functools_cache
        return decorator(warn)
    else:
        return decorator

if joblib:
    class MemorizedFuncNoFail(joblib.memory.MemorizedFunc):
        def __init__(self, warn, *args, **kwargs):
            self.warn = warn
            super().__init__(*args, **kwargs)
        def __call__(self, *args, **kwargs):
            try:
                return super().__call__(*args, **kwargs)
            except PicklingError as e:
                if self.warn:
                    logger.warning(f"Calling unmemoized form of {self.__qualname__} "
                                   "because some arguments cannot be pickled. "
                                   "This message will not be repeated. "
                                   "The original error message was:\n"
                                   + textwrap.indent(str(e.args[0]), "  "))
                    self.warn = False
                return self.func(*args, **kwargs)
        def check_call_in_cache(self, *args, **kwargs):
            try:
                return super().check_call_in_cache(*args, **kwargs)
            except PicklingError:
                return False


def nofail_joblib_cache(warn: bool=True):
    """
    Wrap a function memoized with `joblib.Memory.cache` so that calls with
    unpicklable arguments fall through to the unmemoized function.
    Functions not managed by joblib are returned unchanged.

    Caution
    -------
    Failures are detected by catching `pickle.PicklingError`; if the wrapped
    function itself raises that error, it is executed twice.
    """
    def decorator(cached_f):
        if joblib is None or not isinstance(cached_f, joblib.memory.MemorizedFunc):
            return cached_f
        return MemorizedFuncNoFail(
            warn     =warn,
            func     =cached_f.func,
            location =cached_f.store_backend,
            backend  =None,
            ignore   =cached_f.ignore,
            mmap_mode=cached_f.mmap_mode,
            compress =cached_f.compress,
            verbose  =cached_f._verbose)

    if isinstance(warn, Callable):
        return decorator(warn)
    else:
        return decorator
