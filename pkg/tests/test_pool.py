import pytest

from pseudolab.pool import WorkerPool, default_thread_count, run_parallel


def test_results_keep_input_order():
    items = list(range(50))
    with WorkerPool(4) as pool:
        assert pool.threads == 4
        assert pool.map(lambda k: k * k, items) == [k * k for k in items]
    assert run_parallel(str, [3, 1, 2], threads=3) == ["3", "1", "2"]


def test_single_thread_runs_inline():
    with WorkerPool(1) as pool:
        assert pool.map(abs, [-1, 2, -3]) == [1, 2, 3]


def test_errors_reach_the_caller():
    def fail(k):
        if k == 3:
            raise ArithmeticError("boom")
        return k

    with pytest.raises(ArithmeticError):
        run_parallel(fail, range(6), threads=2)


def test_thread_count():
    assert default_thread_count() >= 1
    with pytest.raises(ValueError):
        WorkerPool(0)
