"""vendokit: registry toolchain for single-file vendorable source modules."""

__version__ = "0.1.0"
