import math

import numpy as np
import pytest
from hypothesis import strategies as st

from tmlambda import THEORY_EXCITED, THEORY_GROUND
from tmlambda.tensorfit import SplittingMeasurement
from tmlambda.zeeman import GyroTensor

PHI_SITES35 = math.atan(1 / math.sqrt(2))  # local xOz azimuth of [-1-11] at sites 3 and 5

unit_vectors = st.tuples(
    st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1)
).filter(lambda v: 0.1 < math.sqrt(sum(x * x for x in v))).map(
    lambda v: tuple(np.asarray(v) / np.linalg.norm(v))
)

gammas = st.floats(min_value=0.5, max_value=600.0, allow_nan=False)
tensors = st.builds(GyroTensor, gammas, gammas, gammas)


@pytest.fixture
def theory():
    return THEORY_GROUND, THEORY_EXCITED


@pytest.fixture
def measured():
    return {
        "[-1-11]": SplittingMeasurement("[-1-11]", 15.3, 14.4, 0.1, 0.1),
        "[001]": SplittingMeasurement("[001]", 285.0, 60.0, 2.0, 2.0),
        "[111]": SplittingMeasurement("[111]", 329.0, 67.0, 2.0, 2.0),
    }


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if "test_acceptance.py" in rep.nodeid and rep.when == "call":
                detail = dict(rep.user_properties).get("detail", "")
                lines.append((rep.nodeid.split("::")[-1], outcome.upper()[:4], detail))
    if lines:
        terminalreporter.section("acceptance criteria")
        for name, status, detail in sorted(lines):
            terminalreporter.write_line(f"{status}  {name}  {detail}")
