"""
Hiérarchie d'exceptions du projet.

Chaque famille porte un ``exit_code`` : la CLI transforme n'importe quelle
erreur de la bibliothèque en code de sortie stable
(0 succès, 2 config, 3 IO, 4 données, 5 évaluation).
"""

from typing import Any, Optional


class BifbError(Exception):
    """Erreur de base de la bibliothèque"""

    exit_code = 1


# Configuration (exit 2)
class ConfigError(BifbError):
    exit_code = 2


class NonPositiveParameter(ConfigError):
    pass


class InvalidDecisionRule(ConfigError):
    pass


# Entrées / sorties (exit 3)
class DataIOError(BifbError):
    exit_code = 3


class MissingFile(DataIOError):
    pass


# Validation des données (exit 4)
class DataValidationError(BifbError):
    exit_code = 4


class MalformedManifest(DataValidationError):
    pass


class LabelNotInStimulusSet(DataValidationError):
    pass


class ChannelMismatch(DataValidationError):
    pass


class InvalidRecording(DataValidationError):
    pass


class UnknownChannel(DataValidationError):
    pass


class BandEdgesAboveNyquist(DataValidationError):
    pass


class NyquistViolation(DataValidationError):
    pass


class OutOfProfileRange(DataValidationError):
    pass


class SignalTooShort(DataValidationError):
    pass


class BankExceedsSpectrumRange(DataValidationError):
    pass


class BandExceedsSpectrumRange(BankExceedsSpectrumRange):
    pass


class DimensionMismatch(DataValidationError):
    pass


class DatasetMismatch(DataValidationError):
    pass


# Évaluation (exit 5)
class EvaluationError(BifbError):
    exit_code = 5


class MissingClass(EvaluationError):
    pass


class NoDecisions(EvaluationError):
    """Aucun essai n'a produit de décision : MRT (et donc ITR) indéfini.

    ``partial`` contient le résumé partiel (précision seule) quand il existe.
    """

    def __init__(self, message: str, partial: Optional[Any] = None):
        super().__init__(message)
        self.partial = partial


class DegenerateCovariance(EvaluationError):
    pass


class ZeroVariance(EvaluationError):
    pass


class LengthMismatch(EvaluationError):
    pass


class InvalidAccuracy(EvaluationError):
    pass


class KTooSmall(EvaluationError):
    pass
