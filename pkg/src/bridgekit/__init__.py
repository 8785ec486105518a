"""Toolkit for learning and serving interpretable bridge design-type classifiers.

Submodules:

- ``data``: dataset model, partitioning, projection, frequency stats
- ``io``: CSV + schema-sidecar interchange
- ``discretize``: supervised (MDL) and equal-frequency binning
- ``ingest``: fixed-width inventory parsing and hazard/cost fusion
- ``featsel``: information gain, chi-squared, ranking and leave-one-out selection
- ``classify``: classifier contract, spec validation, OneR baseline
- ``tree``: C4.5-family pruned decision trees
- ``bayesnet``: K2 structure search and smoothed CPTs
- ``evaluate``: cross-validation, resampling, experiment protocols
- ``modelio``: versioned model files and inspection
- ``synth``: generated fixtures used by tests and demos
- ``service``: HTTP what-if advisor
- ``cli``: command-line entry point
"""

from .data import (
    MISSING,
    AttributeSchema,
    ClassDistribution,
    DataError,
    Dataset,
    Instance,
    SchemaMismatch,
    concat,
    dataset_stats,
    partition_by,
    project,
)
from .classify import ClassifierSpec, TrainedModel, fit, oner_fit, predict_distribution
from .evaluate import (
    ConfusionMatrix,
    EvalReport,
    cross_validate,
    hold_one_state_out,
    per_state_experiment,
    precision_recall,
    resample,
    stratified_folds,
)

__version__ = "0.1.0"
