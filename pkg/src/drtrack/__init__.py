"""Correlation-filter tracking with a factorized filter: a base filter that is
kept consistent across target fragments, scaled by learned per-fragment
reliability weights."""
from .errors import (BetaOutOfRange, ConfigError, DegenerateBox, DegenerateRegion, EmptyInput,
                     ImaginaryResidue, NotFinite, ShapeMismatch, TargetLeavesFrame,
                     TargetTooSmall, TrackingError)
from .evaluation import EvalRecord, OPEResult, center_error, iou, make_records, ope_metrics
from .features import RegionSpec, extract_features
from .fourier import circular_correlate, fft2, ifft2, shift_map
from .labels import (PatchMaskSet, ReliabilityModel, assemble_reliability, make_gaussian_label,
                     make_patch_masks)
from .learning import (LearnConfig, NormalOperator, TrainingSet, build_beta_qp, build_rhs,
                       cg_solve, joint_learn, normal_matvec, objective_value, project_box_sum,
                       solve_box_qp)
from .memory import SampleMemory, learning_rate
from .synthetic import Deformation, Occlusion, SynthSpec, generate
from .tracker import TrackConfig, TrackerState, ablation_config, init, localize, track_sequence, update

__version__ = "0.1.0"
