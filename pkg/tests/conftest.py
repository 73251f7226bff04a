import time
from contextlib import contextmanager

ACCEPTANCE = {}


@contextmanager
def criterion(number, title, budget_s):
    """Time one acceptance criterion and record PASS/FAIL for the summary."""
    start = time.perf_counter()
    status, detail = "FAIL", ""
    try:
        yield
        elapsed = time.perf_counter() - start
        if elapsed > budget_s:
            detail = f"runtime {elapsed:.1f}s over {budget_s}s"
            raise AssertionError(detail)
        status = "PASS"
    except BaseException as exc:
        detail = detail or f"{type(exc).__name__}: {exc}".splitlines()[0][:120]
        raise
    finally:
        elapsed = time.perf_counter() - start
        line = f"[{status}] criterion {number}: {title} ({elapsed:.2f}s / {budget_s}s)"
        if detail:
            line += f" -- {detail}"
        ACCEPTANCE[number] = line
        print(line)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[number])
