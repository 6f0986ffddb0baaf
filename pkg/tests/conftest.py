import pytest

from varbatch.manifest import DistributionSpec, synth_manifest

HOUR = 3600 * 16000


@pytest.fixture(scope="session")
def speech_manifest():
    """10 h of speech-like lengths at 16 kHz (about 2250 sequences)."""
    return synth_manifest(DistributionSpec.speech_like(), 10 * HOUR, seed=0)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS, key=lambda l: int(l.split()[2])):
            terminalreporter.write_line(line)
