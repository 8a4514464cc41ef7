"""Modelling and analysis toolkit for a passive variable-stiffness neck exoskeleton.

Modules
-------
mechanism
    Elastica model of the bar array and its gap-controlled stiffness modes.
biomech
    Planar head statics about C7 and the ideal assistive moment.
fitlab
    Parameter fitting of bench bending tests.
emg
    EMG envelope, posture segmentation and activity normalization.
stats
    Paired Wilcoxon signed-rank comparison of conditions.
protocol
    Posture protocol and synthetic recordings.
"""

from .errors import (
    ConfigurationError, DomainError, FitError, NeckbraceError, NormalizationError,
    NumericError, ParseError, SegmentationError, UndefinedTestError,
    UnsupportedConfigurationError,
)
from .mechanism import BarArraySpec, MomentCurve, StiffnessMode, moment_curve

__version__ = "0.1.0"
