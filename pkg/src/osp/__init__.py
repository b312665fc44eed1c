"""Predicting missing hop distances in graphs from a small sample of node pairs."""

from .autoencoder import AutoencoderModel, TrainConfig, TrainingCorpus, init_model, train
from .completion import CompletionParams, complete_lowrank, default_params
from .graph import (GeneratorParams, Graph, average_degree, hop_distance_matrix,
                    largest_connected_component, load_edge_list, powerlaw_cluster_graph,
                    singular_value_profile)
from .metrics import EvalResult, ahde, mean_error, postprocess, trivial_baselines
from .oracle import OracleConfig, Window, run_oracle, stage2_predict
from .sampling import PartialMatrix, sample_random_pairs, split_observed, unobserved_mask

__version__ = "0.1.0"
