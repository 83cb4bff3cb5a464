import os
from concurrent.futures import ProcessPoolExecutor

WORKERS_ENV = "INFLUENCE_GAME_LAB_WORKERS"


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def pmap(fn, jobs, workers: int | None = None) -> list:
    """Order-preserving map; results never depend on the worker count."""
    jobs = list(jobs)
    workers = default_workers() if workers is None else workers
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, jobs))
