import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_ACCEPTANCE = {}


def record_acceptance(label: str, passed: bool, note: str = ""):
    _ACCEPTANCE[label] = (passed, note)
    line = f"{label}: {'PASS' if passed else 'FAIL'}" + (f"  ({note})" if note else "")
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_ACCEPTANCE):
        passed, note = _ACCEPTANCE[label]
        terminalreporter.write_line(
            f"{label}: {'PASS' if passed else 'FAIL'}" + (f"  ({note})" if note else "")
        )
