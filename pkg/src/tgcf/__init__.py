"""Counterfactual explanations for future-link predictions on
continuous-time dynamic graphs.

The package provides an immutable event-graph store, black-box prediction
sessions with caching, four candidate-selection policies, two explainers
(greedy subset growth and Monte Carlo tree search), and a fidelity/sparsity
evaluation harness with a CLI.
"""

__version__ = "0.1.0"

from .graph import (CandidateSet, Event, GraphView, InvalidTargetError,
                    TemporalGraph, candidate_events, spatial_distance,
                    temporal_view)
from .oracle import (BridgeClient, DegenerateInstanceError, OracleError,
                     PredictorSession, ReferenceParams, ReferencePredictor,
                     ScriptedOracle, classify, delta, make_session,
                     reference_score)
from .policies import (POLICY_NAMES, Policy, Ranking, make_ranking,
                       rank_event_impact, rank_random, rank_spatio_temporal,
                       rank_temporal)
from .result import ExplanationResult
from .greedy import GreedyConfig, greedy_explain
from .mcts import MctsConfig, SearchNode, mcts_explain, sel_score
from .evaluation import (InstanceRecord, MetricReport, UndefinedGroupError,
                         aggregate, aufsc, char_score, fid_flags, jaccard,
                         make_instance_record)
from .harness import (DatasetDescriptor, DatasetParseError, ExperimentConfig,
                      Instance, InstanceSpec, compare_runs, load_dataset,
                      load_jodie_csv, run_experiment, save_jodie_csv, select_instances)
