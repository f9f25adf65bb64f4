"""Automated grading of submissions against assignment criteria.

Each simulation check and each quiz question is worth one unit; the score
is the passed fraction scaled to 0-100.  A failed run fails every
simulation check but still lets quiz answers count.
"""

from __future__ import annotations

from ..timeseries import ChannelError, TimeSeries, sample_at


def _eval_check(check: dict, series: TimeSeries | None) -> dict:
    result = dict(check)
    result["passed"] = False
    result["measured"] = None
    if series is None:
        result["detail"] = "run failed; no result to check"
        return result
    channel = check["channel"]
    try:
        if "property" in check:
            final = float(series.channel(channel)[-1])
            result["measured"] = final
            if check["property"] == "final_value_below":
                result["passed"] = final < check["threshold"]
            else:
                result["passed"] = final > check["threshold"]
            result["detail"] = (f"final {channel} = {final!r} vs threshold "
                                f"{check['threshold']!r}")
        else:
            measured = sample_at(series, channel, check["probe"])
            result["measured"] = measured
            tolerance = check["rel_tol"] * abs(check["expected"])
            result["passed"] = abs(measured - check["expected"]) <= tolerance
            result["detail"] = (f"{channel}@{check['probe']!r} = {measured!r}, "
                                f"expected {check['expected']!r} ± {tolerance!r}")
    except (ChannelError, ValueError) as exc:
        result["detail"] = f"check not evaluable: {exc}"
    return result


def grade(submission: dict, assignment: dict, run: dict) -> tuple[float, dict]:
    """Deterministic (score, report) for a submission whose run finished."""
    series = None
    if run["status"] == "Done":
        series = TimeSeries.from_doc(run["result"])

    checks = [_eval_check(c, series) for c in assignment["criteria"]["checks"]]
    passed = sum(1 for c in checks if c["passed"])

    quiz = assignment.get("quiz") or []
    answers = submission.get("quiz_answers") or []
    correct = sum(1 for q, a in zip(quiz, answers) if a == q["correct_index"])

    total = len(checks) + len(quiz)
    score = 100.0 * (passed + correct) / total if total else 100.0
    report = {"checks": checks, "quiz": {"total": len(quiz), "correct": correct}}
    return score, report
