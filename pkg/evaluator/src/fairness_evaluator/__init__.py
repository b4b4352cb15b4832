"""Evaluation service for fairness-aware hyperparameter optimization.

Loads a tabular dataset, exposes full-data and subsampled information
sources, trains MLP or gradient-boosting classifiers, and reports
(misclassification error, differential statistical parity) from stratified
10-fold cross-validation over a newline-delimited JSON stdin/stdout
protocol.
"""

from .data import Dataset, DatasetSpec, load_dataset, stratified_subsample
from .cv import FoldTrainingError, evaluate
from .metrics import dsp, dsp_aggregate, mce
from .models import build_classifier
from .protocol import ServiceConfig, handshake_message, serve
from .spaces import DOMAINS, validate_values

__version__ = "0.1.0"
