import colored

PASS = "PASS"
FAIL = "FAIL"
SKIP = "SKIP"

_COLORS = {PASS: "green", FAIL: "red", SKIP: "yellow"}


def report_check(name, status, detail=""):
    """Prints one colored PASS/FAIL/SKIP line and returns the status."""
    line = colored.attr("bold") + colored.bg(_COLORS[status]) + f"{status}: {name}" + colored.attr(0)
    if status == FAIL and detail:
        line += "\n" + colored.attr("bold") + colored.fg("red") + detail + colored.attr(0)
    elif detail:
        line += " " + detail
    print(line)
    return status
