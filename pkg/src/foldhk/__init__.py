"""Folded hyperkähler structures: Nahm flow near the fold, mode problems of the
folded Laplacian and the fiberwise cotangent model."""

__version__ = "0.1.0"
