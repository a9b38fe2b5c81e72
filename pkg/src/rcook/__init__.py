"""Chronochrome anomalous change detection with linear and randomized Cook's distance."""
from .cook import CookVariant, cook_deletion_oracle, cook_scores
from .evaluation import RocCurve, apply_threshold, best_operating_point, export_roc_csv, roc
from .pipeline import DetectorConfig, Method, detect, run_experiment, tune_experiment
from .raster import Mask, PixelMatrix, ScoreMap, load_mask, load_matrix, save_heatmap, save_mask, save_matrix
from .regression import LinearModel, augment, fit, leverages, predict, residual_variance, residuals
from .rff import RffMap, rff_design, sample_map, transform
from .synth import Pervasive, SceneSpec, generate
from .tune import GridSpec, TuneResult, cv_tune, log_grid, sample_pixels

__version__ = "0.1.0"
