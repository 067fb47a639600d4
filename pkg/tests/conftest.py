import re
from collections import defaultdict

import pytest

from finslerlab import catalog
from finslerlab.verify import SamplePlan, draw_samples

# The ten catalog entries at their default parameters.
DEFAULT_IDS = [
    "class1",
    "class2",
    "class3",
    "class4",
    "shen_eq8",
    "asanov_eq9",
    "example31",
    "example32",
    "example33",
    "shen_r3_eq1",
]


def default_spec(metric_id):
    return catalog.make_spec(metric_id)


def admissible_points(field, n_points=20, seed=0):
    plan = SamplePlan(n_points=n_points, seed=seed)
    return draw_samples(field.domain_guard, field.n, plan)


@pytest.fixture(params=DEFAULT_IDS)
def catalog_spec(request):
    return default_spec(request.param)


# ---------------------------------------------------------------------------
# acceptance-criterion summary: one PASS/FAIL line per criterion
# ---------------------------------------------------------------------------

CRITERION_NAMES = {
    1: "worked-example reproduction (Landsberg zero, witness component)",
    2: "four-class verification grid",
    3: "spray cross-oracle (variational = closed form = (a,b) formula)",
    4: "Q/Theta oracle against the published closed forms",
    5: "Landsberg-via-P equivalence and perturbation control",
    6: "degeneration suite (constant f, singular parameters)",
    7: "class-equivalence suite",
    8: "jet core: finite-difference agreement and algebra properties",
    9: "determinism, CLI exit-status contract, parser round-trip",
}

_criterion_outcomes = defaultdict(list)
_CRIT_RE = re.compile(r"test_criterion_(\d+)")


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    m = _CRIT_RE.search(report.nodeid)
    if m:
        _criterion_outcomes[int(m.group(1))].append(report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _criterion_outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(CRITERION_NAMES):
        runs = _criterion_outcomes.get(num)
        if not runs:
            continue
        ok = all(runs)
        verdictline = "PASS" if ok else "FAIL"
        terminalreporter.write_line(
            f"criterion {num} [{CRITERION_NAMES[num]}]: {verdictline} "
            f"({sum(runs)}/{len(runs)} cases)"
        )
