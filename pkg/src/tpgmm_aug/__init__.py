"""Task-parameterized Gaussian mixture models improved with synthetic demonstrations."""

from .augment import (AugmentConfig, IterationRecord, RunLog, inject_noise, run_algorithm1,
                      selection_cost, synthesize)
from .dataset import DatasetFile, decode, encode, generate_2d_task, generate_3d_task, load, save
from .errors import (DimensionError, FormatError, FrameValidityError, NumericError, ParseError,
                     VersionError)
from .frames import (TIME_BASED, TRAJECTORY_BASED, Frame, FrameLimits, augment_frame,
                     euler_to_rotation, rotation_to_euler, sample_frame, to_global, to_local,
                     transform_gaussian)
from .gmm import EmConfig, Gmm, em_fit, gmr
from .metrics import CostReport, dtw_distance, rms_cost, dtw_cost
from .tpgmm import (Demonstration, Situation, TpGmm, fit, instantiate, reproduce_demo,
                    reproduce_time_based, reproduce_trajectory_based)

__version__ = "0.1.0"
