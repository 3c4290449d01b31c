"""Collects acceptance outcomes and prints one line per criterion at the end."""
import pytest

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")
    config.addinivalue_line("markers", "acceptance: full-scale acceptance run (slow)")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        number, title = mark.args
        entry = _CRITERIA.setdefault(number, {"title": title, "ok": True, "details": []})
        entry["ok"] &= rep.passed
        detail = dict(item.user_properties).get("detail", "")
        entry["details"].append(f"{item.name}: {'ok' if rep.passed else 'failed'} {detail}".rstrip())


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        e = _CRITERIA[number]
        tr.write_line(f"AC{number:<3} {'PASS' if e['ok'] else 'FAIL'}  {e['title']}")
        for d in e["details"]:
            tr.write_line(f"        {d}")
