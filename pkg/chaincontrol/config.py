"""
Configuration management for chaincontrol.
"""

import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables
load_dotenv()


class Config:
    """Configuration settings for controllability checks and gate synthesis."""

    # Project paths
    PROJECT_ROOT = Path(__file__).parent.parent
    PACKAGE_DIR = Path(__file__).parent
    DATA_DIR = PACKAGE_DIR / "data"
    SPECS_DIR = PACKAGE_DIR / "specs"
    OUTPUT_DIR = Path(os.getenv("OUTPUT_DIR", str(PROJECT_ROOT / "results")))

    # Numerical tolerances
    ZERO_TOL = float(os.getenv("ZERO_TOL", "1e-12"))
    CLOSURE_TOL = float(os.getenv("CLOSURE_TOL", "1e-10"))
    TRACE_TOL = float(os.getenv("TRACE_TOL", "1e-8"))

    # Synthesis settings
    T_MAX = float(os.getenv("T_MAX", "5.0"))
    SIMPLEX_SCALE = float(os.getenv("SIMPLEX_SCALE", "0.5"))
    MAX_EVALUATIONS = int(os.getenv("MAX_EVALUATIONS", "2000"))
    RESTARTS = int(os.getenv("RESTARTS", "50"))
    K_SWITCHES = int(os.getenv("K_SWITCHES", "20"))
    TARGET_ERROR = float(os.getenv("TARGET_ERROR", "1e-4"))
    CONCURRENCY = int(os.getenv("CONCURRENCY", "1"))
    SEED = int(os.getenv("SEED", "0"))

    LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")

    # File paths
    TABLE1_CSV = DATA_DIR / "table1.csv"
    TABLE1_CHECKSUM = DATA_DIR / "table1.csv.sha256"

    @classmethod
    def ensure_directories(cls):
        """Create the output directory if it doesn't exist."""
        cls.OUTPUT_DIR.mkdir(parents=True, exist_ok=True)

    @classmethod
    def bundled_spec(cls, name: str) -> Path:
        """Path of a bundled chain spec, with or without the .spec suffix."""
        if not name.endswith(".spec"):
            name = f"{name}.spec"
        return cls.SPECS_DIR / name
