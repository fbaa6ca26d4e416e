"""Harmonic analysis on the special affine group of the plane.

Subpackages cover: exact enveloping-algebra arithmetic (``enveloping``),
group/coordinate charts and sampling (``saff``), special functions
(``special``), Fourier analysis along the torus and Heisenberg directions
(``fourier``), Eisenstein and Poincare series (``series``), Siegel-Veech
transforms (``sv``), invariant differential operators (``operators``), the
per-mode spectral solver (``spectral``), and the verification CLI (``cli``).
"""

__version__ = "0.1.0"
