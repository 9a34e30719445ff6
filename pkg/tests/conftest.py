import pytest

_CRITERIA: dict[int, tuple[str, str, str]] = {}


class Criterion:
    """One acceptance line; it stays FAIL unless ``finish`` sees every check pass."""

    def __init__(self, number: int, title: str):
        self.number = number
        self.title = title
        self.details: list[str] = []
        _CRITERIA[number] = ("FAIL", title, "did not complete")

    def check(self, ok: bool, detail: str) -> bool:
        self.details.append(("ok   " if ok else "FAIL ") + detail)
        return ok

    def finish(self) -> None:
        ok = all(d.startswith("ok") for d in self.details)
        _CRITERIA[self.number] = ("PASS" if ok else "FAIL", self.title, "; ".join(d[5:] for d in self.details))
        assert ok, "\n".join(self.details)


@pytest.fixture
def criterion():
    return Criterion


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        status, title, detail = _CRITERIA[n]
        terminalreporter.write_line(f"[{status}] {n:2d}. {title}: {detail}")
