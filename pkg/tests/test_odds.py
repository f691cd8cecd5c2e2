"""
Unit tests for the odds calculus module.
"""

import unittest

from equical.equipoise import BP11_JOINT, product_cdf
from equical.exceptions import DegenerateError, DomainError
from equical.odds import (
    Hypothesis,
    OperatingCharacteristics,
    Outcome,
    cdp_odds,
    outcome_percentiles,
    post_odds_negative,
    post_odds_positive,
    table1,
)


class TestSingleTrialOdds(unittest.TestCase):
    """Test cases for post-study odds of one outcome."""

    def test_table1_rows(self):
        """Test odds and BP(1,1) percentiles of the reference designs."""
        rows = table1()
        self.assertEqual(len(rows), 4)
        for row, odds, pct in zip(rows, (9, 18, 19, 99), (0.90, 0.9474, 0.95, 0.99)):
            self.assertAlmostEqual(row.odds, odds, places=9)
            self.assertAlmostEqual(row.percentile, pct, delta=1e-4)

    def test_negative_outcome(self):
        """Test odds in favour of H0 after a negative outcome."""
        odds = post_odds_negative(OperatingCharacteristics(0.05, 0.9))
        self.assertAlmostEqual(odds.value, 9.5, places=12)
        self.assertEqual(odds.favors, Hypothesis.H0)
        self.assertEqual(odds.outcome, Outcome.NEGATIVE)

    def test_prior_odds_scale(self):
        """Test that prior odds multiply positive and divide negative odds."""
        oc = OperatingCharacteristics(0.05, 0.9)
        self.assertAlmostEqual(post_odds_positive(oc, 0.5).value, 9.0, places=12)
        self.assertAlmostEqual(post_odds_negative(oc, 0.5).value, 19.0, places=12)
        with self.assertRaises(DomainError):
            post_odds_positive(oc, 0.0)

    def test_anti_informative_warning(self):
        """Test that power <= alpha logs a warning and still returns odds."""
        with self.assertLogs("equical.odds", level="WARNING") as logs:
            odds = post_odds_positive(OperatingCharacteristics(0.3, 0.2))
        self.assertTrue(any("anti-informative" in line for line in logs.output))
        self.assertLess(odds.value, 1.0)

    def test_degenerate_power(self):
        """Test the negative likelihood ratio at power 1."""
        with self.assertRaises(DegenerateError):
            post_odds_negative(OperatingCharacteristics(0.05, 1.0))

    def test_invalid_characteristics(self):
        """Test validation of alpha and power."""
        with self.assertRaises(DomainError):
            OperatingCharacteristics(0.0, 0.9)
        with self.assertRaises(DomainError):
            OperatingCharacteristics(0.05, 1.2)


class TestCdpOdds(unittest.TestCase):
    """Test cases for development plan odds."""

    def setUp(self):
        """Set up a phase 2 design and phase 3 likelihood ratios."""
        self.phase2 = OperatingCharacteristics(0.10, 0.80)
        self.pos_lrs = [40.0, 20.0]
        self.neg_lr = 9.5

    def test_four_outcomes(self):
        """Test each outcome's odds as products of stage ratios."""
        report = cdp_odds(self.phase2, self.pos_lrs, self.neg_lr)
        self.assertAlmostEqual(report.r10_pp_final.value, 160.0, places=9)
        self.assertAlmostEqual(report.r10_pp[0].value, 320.0, places=9)
        self.assertAlmostEqual(report.r01_pn.value, 9.5 / 8.0, places=12)
        self.assertAlmostEqual(report.r10_np_final.value, 20.0 / 4.5, places=12)
        self.assertAlmostEqual(report.r01_nn.value, 42.75, places=9)
        self.assertEqual(report.r01_nn.favors, Hypothesis.H0)
        self.assertEqual(report.r10_np_final.outcome, Outcome.NEG_POS)

    def test_factorization_identity(self):
        """Test that swapping the phase 2 outcome scales both directions by the same factor."""
        report = cdp_odds(self.phase2, self.pos_lrs, self.neg_lr)
        factor = (0.8 / 0.1) * (0.9 / 0.2)
        self.assertAlmostEqual(report.r10_pp_final.value / report.r10_np_final.value, factor, places=9)
        self.assertAlmostEqual(report.r01_nn.value / report.r01_pn.value, factor, places=9)

    def test_prior_odds(self):
        """Test joint prior odds other than 1."""
        base = cdp_odds(self.phase2, self.pos_lrs, self.neg_lr)
        shifted = cdp_odds(self.phase2, self.pos_lrs, self.neg_lr, prior_odds_joint=2.0)
        self.assertAlmostEqual(shifted.r10_pp_final.value, 2.0 * base.r10_pp_final.value, places=9)
        self.assertAlmostEqual(shifted.r01_nn.value, 0.5 * base.r01_nn.value, places=9)

    def test_invalid_inputs(self):
        """Test degenerate phase 2 power and nonpositive ratios."""
        with self.assertRaises(DegenerateError):
            cdp_odds(OperatingCharacteristics(0.1, 1.0), self.pos_lrs, self.neg_lr)
        with self.assertRaises(DomainError):
            cdp_odds(self.phase2, [], self.neg_lr)
        with self.assertRaises(DomainError):
            cdp_odds(self.phase2, self.pos_lrs, 0.0)

    def test_outcome_percentiles(self):
        """Test joint percentiles of the final-analysis odds."""
        report = cdp_odds(self.phase2, self.pos_lrs, self.neg_lr)
        percentiles = outcome_percentiles(report, BP11_JOINT)
        self.assertEqual(set(percentiles), {Outcome.POS_POS, Outcome.POS_NEG, Outcome.NEG_POS, Outcome.NEG_NEG})
        self.assertAlmostEqual(percentiles[Outcome.NEG_NEG], product_cdf(BP11_JOINT, 42.75), places=12)


if __name__ == "__main__":
    unittest.main()
