"""Configuration management for smoothcert."""

import os
import logging
import yaml
from pathlib import Path
from typing import Any, Dict

from smoothcert.harness import SamplingConfig
from smoothcert.integrator import IntegratorConfig, LniConfig

logger = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "SMOOTHCERT_OUTPUT_DIR"

DEFAULT_CONFIG = {
    # Integration
    "lni_segments": 256,
    "lni_iota": 1e-4,
    "integration_method": "auto",
    "quadrature_panels": 64,
    "quadrature_order": 16,
    "adaptive_tol": 1e-9,
    # Solvers
    "radius_tol": 1e-6,
    "workers": 1,
    # Output and cache
    "output_format": "csv",
    "output_dir": "",  # Empty means $SMOOTHCERT_OUTPUT_DIR or ./results
    "database_location": "",  # Empty means use default
    "cache_enabled": True,
    "log_level": "INFO",
    # Sampling pipeline
    "n1": 50000,
    "n2": 50000,
    "alpha1": 5e-4,
    "alpha2": 5e-4,
    "n_np": 100000,
    "alpha_np": 1e-3,
}


class Config:
    """Manages solver and output configuration."""

    def __init__(self):
        self.config_dir = Path.home() / ".smoothcert"
        self.config_file = self.config_dir / "config.yaml"
        self.config: Dict[str, Any] = {}
        self.load()

    def load(self):
        """Load configuration from file or create default."""
        if not self.config_dir.exists():
            # Create config directory with restricted permissions (user-only)
            self.config_dir.mkdir(parents=True, exist_ok=True, mode=0o700)
        else:
            # Ensure existing directory has correct permissions
            try:
                os.chmod(self.config_dir, 0o700)
            except OSError:
                pass

        if self.config_file.exists():
            try:
                with open(self.config_file, 'r') as f:
                    self.config = yaml.safe_load(f) or {}
            except Exception as e:
                logger.error(f"Error loading config: {e}", exc_info=True)
                self.config = {}

        # Merge with defaults
        for key, value in DEFAULT_CONFIG.items():
            if key not in self.config:
                self.config[key] = value

        # Save to ensure config file exists with all defaults
        self.save()

    def save(self):
        """Save configuration to file."""
        try:
            with open(self.config_file, 'w') as f:
                yaml.dump(self.config, f, default_flow_style=False)
            # Restrict config file to user-only read/write
            try:
                os.chmod(self.config_file, 0o600)
            except OSError:
                pass
        except Exception as e:
            logger.error(f"Error saving config: {e}", exc_info=True)

    def get(self, key: str, default=None):
        """Get configuration value."""
        return self.config.get(key, default)

    def set(self, key: str, value: Any):
        """Set configuration value."""
        self.config[key] = value
        self.save()

    def get_database_path(self) -> Path:
        """Get the result cache path."""
        db_location = self.config.get("database_location", "")
        if db_location:
            return Path(db_location)
        return self.config_dir / "results.db"

    def get_log_path(self) -> Path:
        """Get the log file path."""
        return self.config_dir / "smoothcert.log"

    def get_output_dir(self) -> Path:
        """Output directory: environment, then config, then ./results."""
        location = os.environ.get(OUTPUT_DIR_ENV) or self.config.get("output_dir", "")
        output_dir = Path(location) if location else Path.cwd() / "results"
        output_dir.mkdir(parents=True, exist_ok=True)
        return output_dir

    def integrator_config(self) -> IntegratorConfig:
        """Integration rule and LNI settings for the solvers."""
        return IntegratorConfig(
            method=self.get("integration_method", "auto"),
            lni=LniConfig(int(self.get("lni_segments", 256)), float(self.get("lni_iota", 1e-4))),
            panels=int(self.get("quadrature_panels", 64)),
            order=int(self.get("quadrature_order", 16)),
            adaptive_tol=float(self.get("adaptive_tol", 1e-9)),
        )

    def sampling_config(self) -> SamplingConfig:
        """Sample sizes and confidence levels for the pipeline."""
        return SamplingConfig(
            N1=int(self.get("n1", 50000)),
            N2=int(self.get("n2", 50000)),
            alpha1=float(self.get("alpha1", 5e-4)),
            alpha2=float(self.get("alpha2", 5e-4)),
            N_np=int(self.get("n_np", 100000)),
            alpha_np=float(self.get("alpha_np", 1e-3)),
            workers=self.workers,
        )

    @property
    def radius_tol(self) -> float:
        """Default bisection tolerance on the radius."""
        return float(self.get("radius_tol", 1e-6))

    @property
    def workers(self) -> int:
        """Process or thread count, at least 1."""
        return max(1, int(self.get("workers", 1)))

    @property
    def log_level(self) -> str:
        return str(self.get("log_level", "INFO")).upper()
