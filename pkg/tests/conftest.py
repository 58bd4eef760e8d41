import pytest


@pytest.fixture
def report(request):
    """Print one pass/fail line per acceptance criterion, bypassing output
    capture so the lines always reach the terminal, then assert."""
    capman = request.config.pluginmanager.getplugin("capturemanager")

    def _report(number: int, name: str, ok: bool, detail: str = "") -> None:
        status = "PASS" if ok else "FAIL"
        suffix = f" ({detail})" if detail else ""
        line = f"ACCEPTANCE {number:2d} {name}: {status}{suffix}"
        if capman is not None:
            with capman.global_and_fixture_disabled():
                print(line, flush=True)
        else:  # pragma: no cover - capture disabled
            print(line, flush=True)
        assert ok, f"criterion {number} ({name}) failed: {detail}"

    return _report
