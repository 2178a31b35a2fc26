import json
import os
from dataclasses import asdict, dataclass
from typing import Dict

from dotenv import load_dotenv

load_dotenv()


@dataclass
class AppConfig:
    """Process-wide defaults that do not belong to a single run config."""

    workers: int = 1
    output_dir: str = "runs"
    batch_size: int = 256  # samples per vectorized RK4 sweep
    log_level: str = "INFO"

    @classmethod
    def from_file(cls, config_path: str) -> "AppConfig":
        """Load configuration from a JSON file."""
        with open(config_path, 'r') as f:
            config_data = json.load(f)
        return cls(**config_data)

    @classmethod
    def from_env(cls) -> "AppConfig":
        """Load configuration from environment variables."""
        config = cls()

        if os.getenv("REACHEST_WORKERS"):
            config.workers = max(1, int(os.getenv("REACHEST_WORKERS")))

        if os.getenv("REACHEST_OUTPUT_DIR"):
            config.output_dir = os.getenv("REACHEST_OUTPUT_DIR")

        if os.getenv("REACHEST_BATCH_SIZE"):
            config.batch_size = max(1, int(os.getenv("REACHEST_BATCH_SIZE")))

        if os.getenv("REACHEST_LOG_LEVEL"):
            config.log_level = os.getenv("REACHEST_LOG_LEVEL").upper()

        return config

    def to_dict(self) -> Dict:
        """Convert configuration to dictionary."""
        return asdict(self)
