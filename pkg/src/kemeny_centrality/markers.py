"""The explicit "unbounded" marker.

A disconnected chain has an infinite Kemeny constant, and a cut-edge has an
infinite unregularized score. Those values are reported as :data:`INFINITY`,
which refuses arithmetic instead of silently turning into ``float('inf')``.
"""


class Unbounded:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITY"

    def __str__(self):
        return "inf"

    def __reduce__(self):
        return (Unbounded, ())


INFINITY = Unbounded()


def is_unbounded(value) -> bool:
    return value is INFINITY
