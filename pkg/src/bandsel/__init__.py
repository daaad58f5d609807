"""Moving-window band selection and neural classification of MR spectra."""

from ._backend import BACKEND
from .dataset import (
    BinaryDataset, Dataset, DatasetError, Spectrum, SynthSpec, band_spec, load_dataset,
    select_binary, synthesize, write_dataset,
)
from .energy_select import (
    EnergyReport, FeatureGroup, ZoneConfig, cumulative_groups, energy_ratios, rank_variables,
    zone_energy,
)
from .experiment import (
    CVResult, ExperimentRow, TrendFit, run_pair, run_pairwise_suite, stratified_kfold, trend_fit,
)
from .neuralnet import (
    NetworkConfig, NetworkState, forward, jacobian, load_model, predict_class, save_model, train,
)
from .window_stats import (
    DissimilarityIndexMatrix, build_dim, group_means, lambda_ratio, sweep_windows,
)

__version__ = "0.1.0"
