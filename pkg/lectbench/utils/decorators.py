"""
File: decorators.py
Description: decorator functions guarding numerical routines.
"""

import numpy as np
from decorator import decorator

from ..common.errors import NonFiniteError


def requires_mode(*modes):
    """Insure that the function is called only on traces of certain modes.

    Args:
        modes (list): of str, the forward modes ('train', 'eval') accepted by
            the function.

    Returns:
        func: the decorated function, which has to have a ForwardTrace as its
            first argument.

    Raises:
        ValueError: when the function is called on a trace recorded in another
            mode.

    """
    @decorator
    def wrapper(f, *args, **kwargs):
        trace = args[0]
        if trace.mode not in modes:
            raise ValueError('Function {0.__name__} requires a trace recorded '
                             'in mode {1} ({2} instead)'.format(f,
                                                                list(modes),
                                                                trace.mode))
        return f(*args, **kwargs)
    return wrapper


def finite_result(component):
    """Insure that every array returned by the function is finite.

    The decorated function may return a scalar, an array, or a tuple of them.

    Args:
        component (str): Name of the computation, reported in the error.

    Raises:
        NonFiniteError: when a returned value holds a NaN or an infinity.

    """
    @decorator
    def wrapper(f, *args, **kwargs):
        result = f(*args, **kwargs)
        values = result if isinstance(result, tuple) else (result,)
        for value in values:
            if value is None:
                continue
            if not np.all(np.isfinite(value)):
                raise NonFiniteError(component)
        return result
    return wrapper
