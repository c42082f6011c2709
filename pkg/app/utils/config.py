"""
Configuration settings for the QUBO preprocessing toolkit.
This file contains all the configurable parameters and constants used throughout the application.
"""
import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables from .env file if it exists
load_dotenv()

# Base directory of the project
BASE_DIR = Path(__file__).resolve().parent.parent.parent

# Logging Configuration
LOG_LEVEL = os.getenv("QPRO_LOG_LEVEL", "INFO").upper()
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

# Output Configuration
OUTPUT_DIR = os.getenv("QPRO_OUTPUT_DIR", os.path.join(BASE_DIR, "output"))

# Randomness
DEFAULT_SEED = int(os.getenv("QPRO_SEED", "12345"))

# Exact solver refuses instances above this size (2^n enumeration)
ORACLE_MAX_N = int(os.getenv("QPRO_ORACLE_MAX_N", "25"))

# Tabu search defaults; tenure 0 means "pick from n"
TABU_TIME_LIMIT = float(os.getenv("QPRO_TABU_TIME_LIMIT", "10.0"))
TABU_MAX_ITERATIONS = int(os.getenv("QPRO_TABU_MAX_ITERATIONS", "10000"))
TABU_TENURE = int(os.getenv("QPRO_TABU_TENURE", "0"))

# Instance generator defaults
HUB_FRACTION = float(os.getenv("QPRO_HUB_FRACTION", "0.01"))
HUB_EDGE_SHARE = float(os.getenv("QPRO_HUB_EDGE_SHARE", "0.10"))

# Experiment harness
WORKERS = int(os.getenv("QPRO_WORKERS", "1"))

# Report schemas
REDUCTION_SCHEMA = "qpro.reduction/1"
EXPANSION_SCHEMA = "qpro.expansion/1"

# Exit codes
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

# Coefficient bounds (64-bit signed)
INT64_MIN = -(2 ** 63)
INT64_MAX = 2 ** 63 - 1
