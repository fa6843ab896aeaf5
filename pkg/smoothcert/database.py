"""SQLite cache of computed certification cells."""

import os
import json
import math
import sqlite3
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional
from datetime import datetime

logger = logging.getLogger(__name__)


def _encode(value: Any) -> Any:
    """JSON-safe copy; inf and nan become {"__float__": "inf"} markers."""
    if isinstance(value, float) and not math.isfinite(value):
        return {"__float__": str(value)}
    if isinstance(value, dict):
        return {key: _encode(v) for key, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_encode(v) for v in value]
    return value


def _decode(value: Any) -> Any:
    """Inverse of _encode."""
    if isinstance(value, dict):
        if set(value) == {"__float__"}:
            return float(value["__float__"])
        return {key: _decode(v) for key, v in value.items()}
    if isinstance(value, list):
        return [_decode(v) for v in value]
    return value


def params_key(command: str, params: Dict[str, Any]) -> str:
    """Canonical key: sorted JSON of the command name and its parameters."""
    return json.dumps({"command": command, "params": _encode(params)}, sort_keys=True, separators=(",", ":"))


class Database:
    """Manages the result cache."""

    def __init__(self, db_path: Path):
        logger.info(f"Initializing result cache at: {db_path}")
        self.db_path = Path(db_path)
        self.connection: Optional[sqlite3.Connection] = None
        try:
            self.init_database()
            logger.info("Result cache initialization complete")
        except Exception as e:
            logger.error(f"Failed to initialize result cache: {e}", exc_info=True)
            raise

    def connect(self):
        """Establish database connection."""
        if not self.connection:
            # Check if database file is new (doesn't exist yet)
            is_new_db = not self.db_path.exists()
            logger.debug(f"Connecting to result cache (new={is_new_db})")

            try:
                self.db_path.parent.mkdir(parents=True, exist_ok=True)
                self.connection = sqlite3.connect(str(self.db_path))
                self.connection.row_factory = sqlite3.Row
                logger.debug("Result cache connection established")

                # Set restrictive permissions on new database file
                if is_new_db:
                    try:
                        os.chmod(self.db_path, 0o600)
                    except OSError as e:
                        logger.warning(f"Could not set result cache permissions: {e}")
            except Exception as e:
                logger.error(f"Failed to connect to result cache: {e}", exc_info=True)
                raise
        return self.connection

    def close(self):
        """Close database connection."""
        if self.connection:
            logger.debug("Closing result cache connection")
            self.connection.close()
            self.connection = None

    def init_database(self):
        """Initialize database schema."""
        conn = self.connect()
        cursor = conn.cursor()

        # One row per (command, parameters); result holds the JSON record
        cursor.execute('''
            CREATE TABLE IF NOT EXISTS results (
                id INTEGER PRIMARY KEY AUTOINCREMENT,
                command TEXT NOT NULL,
                params_key TEXT NOT NULL UNIQUE,
                result TEXT NOT NULL,
                created_at TIMESTAMP DEFAULT CURRENT_TIMESTAMP,
                modified_at TIMESTAMP DEFAULT CURRENT_TIMESTAMP
            )
        ''')
        # Index for per-command listing and clearing
        cursor.execute('CREATE INDEX IF NOT EXISTS idx_results_command ON results(command)')

        conn.commit()

    def get_result(self, command: str, params: Dict[str, Any]) -> Optional[Dict[str, Any]]:
        """Cached result for the parameters, or None."""
        conn = self.connect()
        cursor = conn.cursor()
        cursor.execute('SELECT result FROM results WHERE params_key = ?', (params_key(command, params),))
        row = cursor.fetchone()
        if row is None:
            return None
        logger.info(f"Cache hit for {command}")
        return _decode(json.loads(row['result']))

    def put_result(self, command: str, params: Dict[str, Any], result: Dict[str, Any]) -> int:
        """Insert or replace the result for the parameters."""
        key = params_key(command, params)
        logger.info(f"Caching {command} result")
        try:
            conn = self.connect()
            cursor = conn.cursor()
            cursor.execute(
                '''INSERT INTO results (command, params_key, result) VALUES (?, ?, ?)
                   ON CONFLICT(params_key) DO UPDATE SET result = excluded.result, modified_at = ?''',
                (command, key, json.dumps(_encode(result), sort_keys=True), datetime.now())
            )
            conn.commit()
            cursor.execute('SELECT id FROM results WHERE params_key = ?', (key,))
            return cursor.fetchone()['id']
        except Exception as e:
            logger.error(f"Failed to cache {command} result: {e}", exc_info=True)
            raise

    def list_results(self, command: Optional[str] = None) -> List[sqlite3.Row]:
        """All cached rows, oldest first, optionally for one command."""
        conn = self.connect()
        cursor = conn.cursor()
        if command is None:
            cursor.execute('SELECT * FROM results ORDER BY id')
        else:
            cursor.execute('SELECT * FROM results WHERE command = ? ORDER BY id', (command,))
        return cursor.fetchall()

    def delete_result(self, result_id: int):
        """Delete one cached result by id."""
        logger.info(f"Deleting cached result id={result_id}")
        try:
            conn = self.connect()
            conn.execute('DELETE FROM results WHERE id = ?', (result_id,))
            conn.commit()
        except Exception as e:
            logger.error(f"Failed to delete cached result {result_id}: {e}", exc_info=True)
            raise

    def clear(self, command: Optional[str] = None) -> int:
        """Delete cached results, all or one command's; returns the number removed."""
        logger.info(f"Clearing result cache (command={command})")
        try:
            conn = self.connect()
            if command is None:
                cursor = conn.execute('DELETE FROM results')
            else:
                cursor = conn.execute('DELETE FROM results WHERE command = ?', (command,))
            conn.commit()
            return cursor.rowcount
        except Exception as e:
            logger.error(f"Failed to clear result cache: {e}", exc_info=True)
            raise

    def count(self, command: Optional[str] = None) -> int:
        """Number of cached results, all or one command's."""
        conn = self.connect()
        cursor = conn.cursor()
        if command is None:
            cursor.execute('SELECT COUNT(*) AS n FROM results')
        else:
            cursor.execute('SELECT COUNT(*) AS n FROM results WHERE command = ?', (command,))
        return cursor.fetchone()['n']
