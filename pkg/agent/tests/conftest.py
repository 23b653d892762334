import sys
from pathlib import Path

import pytest

WORKLOAD = Path(__file__).parent / "workload"
if str(WORKLOAD) not in sys.path:
    sys.path.insert(0, str(WORKLOAD))


@pytest.fixture(autouse=True)
def fresh_workload_modules():
    """Workload modules get mutated by wrapping; give every test a clean
    import and drop the mutated modules afterwards."""

    def purge():
        for name in [
            n for n in list(sys.modules)
            if n.split(".")[0] in ("uxmini", "uxexotic")
        ]:
            del sys.modules[name]

    purge()
    yield
    purge()
