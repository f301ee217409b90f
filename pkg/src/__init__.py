"""qbo-bench - Quantization-based random search, annealing baselines and Langevin diagnostics"""

__version__ = "0.1.0"
__author__ = "qbo-bench Project"
