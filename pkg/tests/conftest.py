_CRITERIA = {
    "ac01": "entropy characterization (sizes 2-50, tol 1e-12, < 1 s)",
    "ac02": "H([2,1,1]) = 0.78969 +/- 1e-4",
    "ac03": "LS == brute-force normal equations, 100 instances, 1e-9 rel",
    "ac04": "energy model round trip 1e-6 rel; E(120) = 3.4286 +/- 1e-3",
    "ac05": "critical angle within one step (184/220 steps, < 1 s)",
    "ac06": "filtered LEL offset < 0.5 cm and < LS, 10 scenes, < 30 s",
    "ac07": "sigma after <= sigma before, 10 scenes",
    "ac08": "MAD sigma within 10 % of 0.03",
    "ac09": "multi-start determinism incl. parallel",
    "ac10": "end-to-end byte-identical report + 9 CSVs",
}

_results = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    key = name[len("test_"):len("test_") + 4]
    if key not in _CRITERIA:
        return
    if report.when == "call" or report.failed:
        ok = report.passed and _results.get(key, True)
        _results[key] = ok


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_results):
        status = "PASS" if _results[key] else "FAIL"
        terminalreporter.write_line(f"{status}  {key}  {_CRITERIA[key]}")
