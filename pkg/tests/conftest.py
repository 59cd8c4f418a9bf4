import pytest

from blindvote.scenario import ScenarioConfig, VoterSpec


def pytest_runtest_logreport(report):
    """One visible PASS/FAIL line per acceptance criterion."""
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    verdict = "PASS" if report.passed else "FAIL"
    print(f"\n[acceptance] {name}: {verdict}", flush=True)


@pytest.fixture
def honest_config():
    """Ten honest voters, ballots ALPHA x6 / BETA x4, toy keys."""
    return ScenarioConfig(
        st=10,
        ct=20,
        et=30,
        voters=[
            VoterSpec(name=f"voter{i}", ballot="ALPHA" if i < 6 else "BETA")
            for i in range(10)
        ],
        seed=42,
    )


@pytest.fixture
def small_config():
    return ScenarioConfig(
        st=10,
        ct=20,
        et=30,
        voters=[
            VoterSpec(name="alice", ballot="ALPHA"),
            VoterSpec(name="bob", ballot="BETA"),
            VoterSpec(name="carol", ballot="ALPHA"),
        ],
        seed=0,
    )
