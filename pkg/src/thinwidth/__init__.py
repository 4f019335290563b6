"""Width calculus for knot projections presented as critical-event sequences."""

__version__ = "0.1.0"
