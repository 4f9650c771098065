"""
BusyQ - Configuration Module
==============================
Centralized configuration for every numerical engine.
Values here are defaults; QuadratureSettings, SeriesSettings and the CLI
flags override them per run.
"""

import logging
import os

# --- Paths (relative to project root) ---
BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
DATA_DIR = os.path.join(BASE_DIR, "data")

# Golden table export (written by data/reference_tables.py)
GOLDEN_CSV = os.path.join(DATA_DIR, "golden_tables.csv")

# --- Quadrature Settings ---
QUAD_REL_TOL = 1e-10
QUAD_ABS_TOL = 1e-14
QUAD_MAX_SUBDIVISIONS = 2000
# Upper limit substituted for ∞, in natural time units
HORIZON_CAP = 1e6
# Geometric breakpoints start at this many characteristic times and grow ×4
GEOMETRIC_FIRST_POINT = 1.0
GEOMETRIC_RATIO = 4.0

# --- Convolution Series Settings ---
SERIES_POINTS_PER_SCALE = 200      # dt = min(α, 1/λ) / 200
SERIES_TAIL_BUDGET = 0.5e-8        # half of the 1e-8 series error budget
SERIES_MAX_TERMS = 400
SERIES_DIRECT_MAX_POINTS = 2048    # above this the spectral path is used
SERIES_MAX_GRID_POINTS = 2_000_000 # dt is coarsened to respect this
SERIES_HEAVY_TRAFFIC_MEANS = 10.0  # default t_max = this × e^ρ/λ
SERIES_TILT = 25.0                 # exponential damping across the FFT window

# --- Simulation Settings ---
SIM_MAX_EVENTS_PER_PERIOD = 10**7
SIM_DEFAULT_SEED = 20240601
SIM_BUFFER_SIZE = 8192             # random variates drawn per refill
SIM_CDF_POINTS = 1001

# --- Table Comparison Tolerances ---
TOL_CLOSED_FORM = 1e-6    # Tables 3.1, 4.1, 8.x analytic columns
TOL_QUADRATURE = 5e-4     # Tables 5.1, 6.1, 8.x M|M|∞ column
TOL_PARETO_PLATEAU = 1e-3 # Tables 7.1 / 7.2
TABLE_WORKERS = 4

# --- Server Settings ---
HOST = "0.0.0.0"
PORT = 8000

# --- Logging ---
LOG_LEVEL = os.environ.get("BUSYQ_LOG_LEVEL", "WARNING")
LOG_FORMAT = "%(asctime)s %(levelname)-7s %(name)s: %(message)s"


def configure_logging(level=None):
    """Attach a stderr handler to the busyq logger hierarchy."""
    logger = logging.getLogger("busyq")
    logger.setLevel(level or LOG_LEVEL)
    if not logger.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(handler)
    return logger
