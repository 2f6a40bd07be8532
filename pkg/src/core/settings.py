import os
from pathlib import Path

from dotenv import load_dotenv

# Load environment variables
load_dotenv()

PROJECT_ROOT = Path(__file__).resolve().parents[2]

DEFAULT_MASTER_SEED = 12345


def log_level() -> str:
    return os.getenv("QFALAB_LOG_LEVEL", "WARNING").upper()


def default_threads() -> int:
    """Worker threads for parallel sweeps; never changes report contents."""
    return max(1, int(os.getenv("QFALAB_THREADS", "1")))


def reference_tables_path() -> Path:
    return Path(
        os.getenv(
            "QFALAB_REFERENCE_TABLES",
            str(PROJECT_ROOT / "config" / "reference_tables.yaml"),
        )
    )
