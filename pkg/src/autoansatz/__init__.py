"""AutoAnsatz - quantum neural networks for beam prediction with automated ansatz search"""

__version__ = "0.1.0"
