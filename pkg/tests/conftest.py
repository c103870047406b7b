import pytest


@pytest.fixture
def announce(capsys):
    """Print a line that bypasses pytest's capture (used for the one
    pass/fail line per acceptance criterion)."""
    def _announce(line):
        with capsys.disabled():
            print(line, flush=True)
    return _announce
