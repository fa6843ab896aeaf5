"""Unit tests for Database class."""

import math

import pytest

from smoothcert.database import Database, params_key


class TestDatabase:
    """Test cases for Database class."""

    @pytest.fixture
    def db(self, tmp_path):
        """Create a temporary result cache for testing."""
        database = Database(tmp_path / "cache" / "results.db")
        yield database
        database.close()

    def test_database_initialization(self, db):
        """Test that the cache file, table and index are created."""
        assert db.db_path.exists()
        assert (db.db_path.stat().st_mode & 0o777) == 0o600
        cursor = db.connection.cursor()
        cursor.execute("SELECT name FROM sqlite_master WHERE type='table' AND name='results'")
        assert cursor.fetchone() is not None
        cursor.execute("SELECT name FROM sqlite_master WHERE type='index'")
        assert "idx_results_command" in [row[0] for row in cursor.fetchall()]

    def test_put_and_get(self, db):
        """Test storing and retrieving a result."""
        params = {"eta": 2.0, "A": 0.7, "B": 0.8}
        result_id = db.put_result("simulate", params, {"radius": 0.5})
        assert result_id > 0
        assert db.get_result("simulate", params) == {"radius": 0.5}

    def test_miss(self, db):
        """Test that unknown parameters return None."""
        assert db.get_result("simulate", {"eta": 1.0}) is None

    def test_key_ignores_order(self, db):
        """Test that parameter order does not change the key."""
        db.put_result("certify", {"a": 1, "b": 2}, {"radius": 1.0})
        assert db.get_result("certify", {"b": 2, "a": 1}) == {"radius": 1.0}
        assert params_key("certify", {"a": 1, "b": 2}) == params_key("certify", {"b": 2, "a": 1})

    def test_command_is_part_of_key(self, db):
        """Test that identical parameters under another command miss."""
        db.put_result("certify", {"a": 1}, {"radius": 1.0})
        assert db.get_result("simulate", {"a": 1}) is None

    def test_upsert(self, db):
        """Test that a second put replaces the stored result."""
        first = db.put_result("certify", {"a": 1}, {"radius": 1.0})
        second = db.put_result("certify", {"a": 1}, {"radius": 2.0})
        assert first == second
        assert db.get_result("certify", {"a": 1}) == {"radius": 2.0}
        assert db.count() == 1

    def test_non_finite_values(self, db):
        """Test that infinities and NaN survive the round trip."""
        db.put_result("certify", {"L": -math.inf}, {"log_neg_nu1": -math.inf, "gap": math.nan})
        stored = db.get_result("certify", {"L": -math.inf})
        assert stored["log_neg_nu1"] == -math.inf
        assert math.isnan(stored["gap"])

    def test_list_count_delete_clear(self, db):
        """Test listing, counting, deleting and clearing."""
        db.put_result("certify", {"a": 1}, {})
        db.put_result("certify", {"a": 2}, {})
        sim_id = db.put_result("simulate", {"a": 1}, {})

        assert db.count() == 3
        assert db.count("certify") == 2
        assert [row["command"] for row in db.list_results("simulate")] == ["simulate"]

        db.delete_result(sim_id)
        assert db.count("simulate") == 0
        assert db.clear("certify") == 2
        assert db.count() == 0

    def test_reopen(self, tmp_path):
        """Test that results persist across connections."""
        path = tmp_path / "results.db"
        database = Database(path)
        database.put_result("tables", {"name": "mu"}, {"rows": 3})
        database.close()

        reopened = Database(path)
        assert reopened.get_result("tables", {"name": "mu"}) == {"rows": 3}
        reopened.close()
