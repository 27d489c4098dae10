"""
kiteratio - principal ratios of connected graphs.

Perron eigenvectors, principal-ratio bounds, analytic kite graphs, numeric
certificates for the auxiliary inequalities, and brute-force checks that the
kite graph maximises the principal ratio.
"""

__version__ = "1.0.0"
__author__ = "Your Name"
__email__ = "your.email@example.com"
