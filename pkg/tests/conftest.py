def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(RESULTS):
        passed, detail = RESULTS[cid]
        terminalreporter.write_line(f"{cid} {'PASS' if passed else 'FAIL'}  {detail}")
