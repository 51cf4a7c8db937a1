import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cmgroups.cli import cmd_compute  # noqa: E402
from cmgroups.config import RunConfig  # noqa: E402
from cmgroups.curves import compute_record  # noqa: E402
from cmgroups.division import good_primes_upto  # noqa: E402
from cmgroups.presets import get_preset  # noqa: E402


@pytest.fixture(scope="session")
def cm4():
    return get_preset("cm-4")


@pytest.fixture(scope="session")
def cm4_records_1e4(cm4):
    return [compute_record(cm4, p) for p in good_primes_upto(cm4, 10_000)]


@pytest.fixture(scope="session")
def desk_run(tmp_path_factory):
    """The cm-4 cache to x = 10^6, computed once per session."""
    root = tmp_path_factory.mktemp("desk")
    config = RunConfig(curve=get_preset("cm-4"), xmax=10**6, cache_dir=root / "cache", out=root / "report")
    t0 = time.perf_counter()
    cache = cmd_compute(config)
    return config, cache, time.perf_counter() - t0
