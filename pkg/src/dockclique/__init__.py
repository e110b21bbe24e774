"""Max-weight clique docking problems solved with simulated QAOA variants."""

__version__ = "0.1.0"
