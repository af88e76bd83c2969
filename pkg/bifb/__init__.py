"""
Reconnaissance de fréquence SSVEP par banc de filtres bio-inspiré (BIFB),
méthodes de comparaison (UF, PSDA, CCA) et banc d'évaluation hors ligne.
"""

__version__ = "1.0.0"
