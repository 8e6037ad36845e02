"""arraykit: a tiny elementwise array library.

Stands in for a private library during tests: wraps plain Python lists and
offers elementwise arithmetic, comparisons, selection and reductions with
scalar broadcasting. No third-party dependencies.
"""

import builtins as _builtins


class Array:
    def __init__(self, values):
        self.values = [float(v) for v in values]

    def tolist(self):
        return list(self.values)

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __eq__(self, other):
        if isinstance(other, Array):
            return self.values == other.values
        return NotImplemented

    def __repr__(self):
        return "Array(%r)" % (self.values,)


def _coerce_pair(a, b):
    """Returns two equal-length float lists, broadcasting scalars."""
    a_arr = isinstance(a, Array)
    b_arr = isinstance(b, Array)
    if a_arr and b_arr:
        if len(a) != len(b):
            raise ValueError("length mismatch: %d vs %d" % (len(a), len(b)))
        return a.values, b.values
    if a_arr:
        return a.values, [float(b)] * len(a)
    if b_arr:
        return [float(a)] * len(b), b.values
    raise TypeError("at least one operand must be an arraykit.Array")


def _require_array(a):
    if not isinstance(a, Array):
        raise TypeError("expected an arraykit.Array, got %r" % type(a).__name__)
    return a


def asarray(values):
    if isinstance(values, Array):
        return Array(values.values)
    return Array(values)


def tolist(a):
    return _require_array(a).tolist()


def add(a, b):
    xs, ys = _coerce_pair(a, b)
    return Array(x + y for x, y in zip(xs, ys))


def subtract(a, b):
    xs, ys = _coerce_pair(a, b)
    return Array(x - y for x, y in zip(xs, ys))


def multiply(a, b):
    xs, ys = _coerce_pair(a, b)
    return Array(x * y for x, y in zip(xs, ys))


def divide(a, b):
    xs, ys = _coerce_pair(a, b)
    return Array(x / y for x, y in zip(xs, ys))


def where(cond, a, b):
    cond_values = _require_array(cond).values
    if isinstance(a, Array) and len(a) != len(cond_values):
        raise ValueError("where: 'a' length mismatch")
    if isinstance(b, Array) and len(b) != len(cond_values):
        raise ValueError("where: 'b' length mismatch")
    a_values = a.values if isinstance(a, Array) else [float(a)] * len(cond_values)
    b_values = b.values if isinstance(b, Array) else [float(b)] * len(cond_values)
    return Array(x if c else y for c, x, y in zip(cond_values, a_values, b_values))


def equal(a, b):
    xs, ys = _coerce_pair(a, b)
    return Array(1.0 if x == y else 0.0 for x, y in zip(xs, ys))


def greater(a, b):
    xs, ys = _coerce_pair(a, b)
    return Array(1.0 if x > y else 0.0 for x, y in zip(xs, ys))


def maximum(a, b):
    xs, ys = _coerce_pair(a, b)
    return Array(x if x >= y else y for x, y in zip(xs, ys))


def minimum(a, b):
    xs, ys = _coerce_pair(a, b)
    return Array(x if x <= y else y for x, y in zip(xs, ys))


def clip(a, lo, hi):
    arr = _require_array(a)
    lo = float(lo)
    hi = float(hi)
    if lo > hi:
        raise ValueError("clip: lo must not exceed hi")
    return Array(_builtins.min(_builtins.max(v, lo), hi) for v in arr.values)


def sum(a):
    arr = _require_array(a)
    total = 0.0
    for v in arr.values:
        total += v
    return total


def mean(a):
    arr = _require_array(a)
    if len(arr) == 0:
        raise ValueError("mean of an empty array")
    return sum(arr) / len(arr)


def min(a):
    arr = _require_array(a)
    if len(arr) == 0:
        raise ValueError("min of an empty array")
    lowest = arr.values[0]
    for v in arr.values[1:]:
        if v < lowest:
            lowest = v
    return lowest


def max(a):
    arr = _require_array(a)
    if len(arr) == 0:
        raise ValueError("max of an empty array")
    highest = arr.values[0]
    for v in arr.values[1:]:
        if v > highest:
            highest = v
    return highest
