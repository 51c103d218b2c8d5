"""Floating-point helpers."""

import numpy as np


def compensated_sum(values, axis: int = -1) -> np.ndarray:
    """
    Neumaier-compensated sum along ``axis``, after sorting ascending.

    Sorting fixes the summation order, so the result does not depend on the
    order in which the entries were given.

    Args:
        values: Array of addends
        axis: Axis to reduce

    Returns:
        Array with ``axis`` removed
    """
    terms = np.sort(np.asarray(values, dtype=float), axis=axis)
    terms = np.moveaxis(terms, axis, -1)
    total = np.zeros(terms.shape[:-1])
    carry = np.zeros(terms.shape[:-1])
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(terms.shape[-1]):
            term = terms[..., k]
            t = total + term
            big = np.abs(total) >= np.abs(term)
            carry += np.where(big, (total - t) + term, (term - t) + total)
            total = t
        return total + carry

