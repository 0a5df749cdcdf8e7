"""Configuration management for the graph bundle verifier."""

import os
import sys
from dataclasses import dataclass

RICCI_READINGS = ("per-index", "global")


@dataclass(frozen=True)
class Config:
    """Resource caps and switches; defaults apply when a library call gets no config."""

    # Storage / logging
    data_dir: str = "./data"
    log_level: str = "INFO"
    ledger_enabled: bool = True

    # Search caps
    aut_vertex_cap: int = 64
    aut_order_cap: int = 3628800  # 10!
    frame_degree_cap: int = 8
    bfs_state_cap: int = 1_000_000
    count_max_length: int = 16

    # Condition (iii) reading for Ricci-flatness
    ricci_reading: str = "per-index"

    @classmethod
    def from_env(cls) -> "Config":
        """Load configuration from environment variables with validation."""
        caps = {}
        for field_name, env_name, default in (
            ("aut_vertex_cap", "BUNDLE_AUT_VERTEX_CAP", cls.aut_vertex_cap),
            ("aut_order_cap", "BUNDLE_AUT_ORDER_CAP", cls.aut_order_cap),
            ("frame_degree_cap", "BUNDLE_FRAME_DEGREE_CAP", cls.frame_degree_cap),
            ("bfs_state_cap", "BUNDLE_BFS_STATE_CAP", cls.bfs_state_cap),
            ("count_max_length", "BUNDLE_COUNT_MAX_LENGTH", cls.count_max_length),
        ):
            raw = os.getenv(env_name, str(default))
            try:
                value = int(raw)
            except ValueError:
                print(f"ERROR: {env_name} must be an integer, got {raw!r}")
                sys.exit(2)
            if value <= 0:
                print(f"ERROR: {env_name} must be positive, got {value}")
                sys.exit(2)
            caps[field_name] = value

        reading = os.getenv("BUNDLE_RICCI_READING", cls.ricci_reading).strip().lower()
        if reading not in RICCI_READINGS:
            print(f"ERROR: BUNDLE_RICCI_READING must be one of {', '.join(RICCI_READINGS)}, got {reading!r}")
            sys.exit(2)

        log_level = os.getenv("BUNDLE_LOG_LEVEL", cls.log_level).upper()
        ledger_enabled = os.getenv("BUNDLE_LEDGER_ENABLED", "true").lower() == "true"

        return cls(
            data_dir=os.getenv("BUNDLE_DATA_DIR", cls.data_dir),
            log_level=log_level,
            ledger_enabled=ledger_enabled,
            ricci_reading=reading,
            **caps,
        )
