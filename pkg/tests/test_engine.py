import pytest

from jpsq.engine import WORKERS_ENV, default_workers, failures, sweep_engine


def square(x):
    if x == 3:
        raise ValueError("bad point")
    return x * x


class TestSweepEngine:
    @pytest.mark.parametrize("workers", [1, 2, 3])
    def test_order_and_isolation(self, workers):
        out = sweep_engine(range(6), square, workers)
        assert [o.index for o in out] == list(range(6))
        assert [o.value for o in out] == [0, 1, 4, None, 16, 25]
        f = failures(out)
        assert list(f) == [3] and f[3].startswith("ValueError: bad point")

    def test_empty(self):
        assert sweep_engine([], square, 2) == []

    def test_bad_worker_count(self):
        with pytest.raises(ValueError):
            sweep_engine([1], square, 0)

    def test_env_default(self, monkeypatch):
        monkeypatch.delenv(WORKERS_ENV, raising=False)
        assert default_workers() == 1
        monkeypatch.setenv(WORKERS_ENV, "3")
        assert default_workers() == 3
        for bad in ("0", "many"):
            monkeypatch.setenv(WORKERS_ENV, bad)
            with pytest.raises(ValueError):
                default_workers()
