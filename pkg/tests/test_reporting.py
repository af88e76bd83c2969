"""
Tests des rapports texte / CSV et de la relecture des résultats
"""

from bifb.evaluation import build_report
from bifb.pipeline import TrialOutcome
from bifb.reporting import (
    OUTCOMES_CSV, REPORT_TXT, SUMMARY_CSV, comparison_frame, format_comparison, format_report, read_outcomes,
    write_run,
)

STIMULI = (8.0, 14.0, 28.0)


def _outcomes(method="bifb"):
    return [
        TrialOutcome("S01_f01_r01", "S01", 0, 0, 3.0, method),
        TrialOutcome("S01_f02_r01", "S01", 1, 1, 2.5, method),
        TrialOutcome("S01_f03_r01", "S01", 2, None, None, method),
        TrialOutcome("S02_f01_r01", "S02", 0, 0, 2.0, method),
        TrialOutcome("S02_f02_r01", "S02", 1, 2, 4.0, method),
        TrialOutcome("S02_f03_r01", "S02", 2, 2, 3.5, method),
    ]


class TestRunFiles:

    def test_written_files(self, tmp_path):
        outcomes = _outcomes()
        write_run(tmp_path, outcomes, build_report(outcomes, STIMULI, {"gamma": 1.0}))
        for name in (REPORT_TXT, SUMMARY_CSV, OUTCOMES_CSV):
            assert (tmp_path / name).exists()

    def test_outcomes_round_trip(self, tmp_path):
        outcomes = _outcomes()
        write_run(tmp_path, outcomes, build_report(outcomes, STIMULI))
        assert read_outcomes(tmp_path / OUTCOMES_CSV) == outcomes

    def test_report_is_deterministic(self, tmp_path):
        outcomes = _outcomes()
        write_run(tmp_path / "a", outcomes, build_report(outcomes, STIMULI))
        write_run(tmp_path / "b", outcomes, build_report(outcomes, STIMULI))
        for name in (REPORT_TXT, SUMMARY_CSV, OUTCOMES_CSV):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_report_content(self):
        text = format_report(build_report(_outcomes(), STIMULI, {"gamma": 1.0}))
        assert "Méthode : bifb" in text
        assert "S01" in text and "S02" in text and "Global" in text
        assert "28 Hz" in text

    def test_unavailable_itr_flagged(self):
        outcomes = [TrialOutcome("T1", "S01", 0, None, None, "psda"), TrialOutcome("T2", "S01", 1, None, None, "psda")]
        assert "ITR indisponible" in format_report(build_report(outcomes, STIMULI))


class TestComparison:

    def test_side_by_side_columns(self):
        reports = {m: build_report(_outcomes(m), STIMULI) for m in ("bifb", "uf")}
        frame = comparison_frame(reports)
        assert list(frame.columns) == ["subject_id", "bifb", "uf"]
        assert frame["subject_id"].tolist() == ["S01", "S02", "pooled"]
        assert frame["bifb"].tolist() == frame["uf"].tolist()

    def test_notes_reported(self):
        reports = {m: build_report(_outcomes(m), STIMULI) for m in ("bifb", "uf")}
        text = format_comparison(reports, {"uf": (None, None, "ZeroVariance : différences toutes égales")}, "bifb")
        assert "ZeroVariance" in text
