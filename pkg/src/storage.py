"""SQLite run ledger for CLI invocations."""

import logging
import sqlite3
from datetime import datetime
from pathlib import Path
from typing import Dict, List, Optional

logger = logging.getLogger(__name__)


class RunLedger:
    """Records one row per CLI run; never consulted when building reports."""

    def __init__(self, db_path: str):
        """
        Initialize the ledger.

        Args:
            db_path: Path to SQLite database file
        """
        self.db_path = db_path

        # Ensure parent directory exists
        Path(db_path).parent.mkdir(parents=True, exist_ok=True)

        self.conn = sqlite3.connect(db_path, check_same_thread=False)
        self.conn.row_factory = sqlite3.Row
        self._initialize_schema()

        logger.debug(f"Opened run ledger at {db_path}")

    def _initialize_schema(self):
        """Create the runs table if it doesn't exist."""
        cursor = self.conn.cursor()
        cursor.execute(
            """
            CREATE TABLE IF NOT EXISTS runs (
                id INTEGER PRIMARY KEY AUTOINCREMENT,
                command TEXT NOT NULL,
                input_digest TEXT,
                exit_code INTEGER NOT NULL,
                status TEXT NOT NULL,
                duration_seconds REAL,
                timestamp TEXT NOT NULL,
                error_message TEXT
            )
            """
        )
        self.conn.commit()

    def log_run(
        self,
        command: str,
        exit_code: int,
        status: str,
        input_digest: Optional[str] = None,
        duration: Optional[float] = None,
        error_message: Optional[str] = None,
    ) -> None:
        """
        Log a CLI run.

        Args:
            command: Subcommand name and arguments
            exit_code: Process exit code
            status: 'success', 'mismatch', 'error' or 'resource_cap'
            input_digest: Combined digest of the input files, if any
            duration: Wall-clock seconds
            error_message: Optional error message
        """
        cursor = self.conn.cursor()
        cursor.execute(
            """
            INSERT INTO runs (command, input_digest, exit_code, status, duration_seconds, timestamp, error_message)
            VALUES (?, ?, ?, ?, ?, ?, ?)
            """,
            (command, input_digest, exit_code, status, duration, datetime.utcnow().isoformat(), error_message),
        )
        self.conn.commit()
        logger.debug(f"Logged run: {command} -> {status} ({exit_code})")

    def recent_runs(self, limit: int = 20) -> List[Dict[str, object]]:
        """Most recent runs first."""
        cursor = self.conn.cursor()
        cursor.execute("SELECT * FROM runs ORDER BY id DESC LIMIT ?", (limit,))
        return [dict(row) for row in cursor.fetchall()]

    def close(self):
        """Close database connection."""
        if self.conn:
            self.conn.close()
            logger.debug("Run ledger closed")
