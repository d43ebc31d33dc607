import pytest

# criterion id -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {key}: {detail}")


@pytest.fixture
def record():
    """Record one acceptance line. Use as a context: the line is marked FAIL
    unless the block finishes without raising."""

    class _Recorder:
        def __call__(self, key, detail=""):
            self.key = key
            self.detail = detail
            return self

        def __enter__(self):
            ACCEPTANCE[self.key] = (False, self.detail)
            return self

        def __exit__(self, exc_type, exc, tb):
            ACCEPTANCE[self.key] = (exc_type is None, self.detail)
            return False

    return _Recorder()
