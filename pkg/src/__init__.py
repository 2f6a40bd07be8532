"""qfalab: space-efficient quantum finite automata for L_p."""

__version__ = "1.0.0"
