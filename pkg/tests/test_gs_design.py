"""
Unit tests for the group sequential design module.
"""

import dataclasses
import math
import unittest
from unittest.mock import patch

from equical.exceptions import DegenerateError, DomainError
from equical.gs_design import (
    AccrualModel,
    GSAnalysis,
    analysis_likelihood_ratios,
    boundaries,
    build_design,
    cumulative_power,
    event_drift,
    expected_event_fraction,
    first_crossing_probs,
    hr_critical_value,
    obf_spending,
    pocock_spending,
    required_events,
    required_sample_size,
)
from equical.tables import phase3_design


class TestSpending(unittest.TestCase):
    """Test cases for spending functions."""

    def test_obf_values(self):
        """Test full spend, the interim spend and the small-t limit."""
        self.assertAlmostEqual(obf_spending(1.0, 0.025), 0.025, delta=1e-10)
        self.assertAlmostEqual(obf_spending(0.7, 0.025), 0.00737, delta=2e-4)
        self.assertLess(obf_spending(1e-4, 0.025), 1e-12)

    def test_obf_monotone(self):
        """Test that spending increases with information."""
        spent = [obf_spending(t / 10.0, 0.025) for t in range(1, 11)]
        self.assertEqual(spent, sorted(spent))

    def test_pocock_values(self):
        """Test the Pocock-type function at the ends."""
        self.assertAlmostEqual(pocock_spending(1.0, 0.025), 0.025, places=12)
        self.assertGreater(pocock_spending(0.5, 0.025), obf_spending(0.5, 0.025))

    def test_domain(self):
        """Test t <= 0."""
        with self.assertRaises(DomainError):
            obf_spending(0.0, 0.025)


class TestBoundaries(unittest.TestCase):
    """Test cases for boundary computation."""

    def test_fixed_design(self):
        """Test the single-analysis boundary."""
        self.assertAlmostEqual(boundaries([1.0], 0.025)[0], 1.959964, places=5)

    def test_one_interim(self):
        """Test the interim at 70% information."""
        c1, c2 = boundaries([0.7, 1.0], 0.025)
        self.assertAlmostEqual(c1, 2.44, delta=0.02)
        self.assertAlmostEqual(c2, 2.00, delta=0.02)
        self.assertGreater(c1, c2)

    def test_smaller_alpha_raises_boundaries(self):
        """Test monotonicity in alpha."""
        loose = boundaries([0.7, 1.0], 0.025)
        strict = boundaries([0.7, 1.0], 0.005)
        self.assertTrue(all(s > l for s, l in zip(strict, loose)))

    def test_zero_spend_gives_infinite_boundary(self):
        """Test an analysis that spends nothing."""
        bounds = boundaries([0.5, 1.0], 0.025, spending=lambda t, a: a if t >= 1.0 else 0.0)
        self.assertEqual(bounds[0], math.inf)
        self.assertAlmostEqual(bounds[1], 1.959964, places=5)

    def test_invalid_fractions(self):
        """Test fraction validation."""
        with self.assertRaises(DomainError):
            boundaries([0.7, 0.9], 0.025)
        with self.assertRaises(DomainError):
            boundaries([0.7, 0.6, 1.0], 0.025)


class TestDesign(unittest.TestCase):
    """Test cases for designs and their operating characteristics."""

    def setUp(self):
        """Set up the 90%-power confirmatory design."""
        self.design = phase3_design(0.90, 680)

    def test_events_and_critical_values(self):
        """Test pinned events and hazard-ratio critical values."""
        self.assertEqual(self.design.events, [245, 354])
        ia, fa = self.design.analyses
        self.assertAlmostEqual(ia.hr_critical, 0.73, delta=0.015)
        self.assertAlmostEqual(fa.hr_critical, 0.81, delta=0.015)
        self.assertLess(ia.hr_critical, fa.hr_critical)
        for a in self.design.analyses:
            self.assertAlmostEqual(a.hr_critical, math.exp(-2.0 * a.z_boundary / math.sqrt(a.events)), places=12)

    def test_fwer_conservation(self):
        """Test that null first-crossing probabilities sum to the one-sided alpha."""
        shapes = {1: ([1.0], [100]), 2: ([0.7, 1.0], [70, 100]), 3: ([0.3, 0.6, 1.0], [30, 60, 100])}
        for fractions, events in shapes.values():
            for fwer in (0.01, 0.05):
                design = build_design(fractions, fwer, 0.7, events=events, n_total=200)
                self.assertAlmostEqual(sum(first_crossing_probs(design, 0.0)), fwer / 2.0, delta=1e-6)

    def test_boundary_identity(self):
        """Test that re-integrating the boundaries reproduces the spending increments."""
        probs = first_crossing_probs(self.design, 0.0)
        self.assertAlmostEqual(probs[0], obf_spending(0.7, 0.025), delta=1e-6)
        self.assertAlmostEqual(probs[1], 0.025 - obf_spending(0.7, 0.025), delta=1e-6)

    def test_power_at_event_drift(self):
        """Test cumulative power at the drift of the final event count."""
        drift = event_drift(0.7, 354)
        self.assertAlmostEqual(drift, 3.355, delta=0.005)
        self.assertAlmostEqual(cumulative_power(self.design, drift), 0.90, delta=0.02)
        self.assertGreaterEqual(cumulative_power(self.design, 8.0), 0.9999)

    def test_power_target_sets_drift(self):
        """Test that a power target calibrates the design drift."""
        self.assertAlmostEqual(cumulative_power(self.design, self.design.drift), 0.90, delta=1e-6)

    def test_power_monotone_in_events(self):
        """Test that more events give more power at a fixed hazard ratio."""
        small = build_design([0.7, 1.0], 0.05, 0.7, events=[70, 100], n_total=400)
        large = build_design([0.7, 1.0], 0.05, 0.7, events=[140, 200], n_total=400)
        self.assertLess(cumulative_power(small, small.drift), cumulative_power(large, large.drift))

    def test_design_validation(self):
        """Test invalid design inputs."""
        with self.assertRaises(DomainError):
            build_design([0.7, 1.0], 0.05, 0.7, n_total=680)
        with self.assertRaises(DomainError):
            build_design([0.7, 1.0], 0.05, 1.2, events=[70, 100], n_total=200)
        with self.assertRaises(DomainError):
            build_design([0.7, 1.0], 0.05, 0.7, events=[100, 70], n_total=200)
        with self.assertRaises(DomainError):
            GSAnalysis(0.0, 10, 2.0)


class TestLikelihoodRatios(unittest.TestCase):
    """Test cases for per-analysis likelihood ratios."""

    def test_confirmatory_design(self):
        """Test interim, final and negative likelihood ratios of the 90%-power design."""
        lrs = analysis_likelihood_ratios(phase3_design(0.90, 680))
        self.assertEqual(lrs.convention, "conditional")
        self.assertAlmostEqual(lrs.positive[0], 43.3, delta=4.33)
        self.assertAlmostEqual(lrs.positive[1], 19.7, delta=1.97)
        self.assertAlmostEqual(lrs.negative, 9.5, delta=0.95)

    def test_high_power_negative(self):
        """Test the negative likelihood ratio of the 99%-power design."""
        lrs = analysis_likelihood_ratios(phase3_design(0.99, 1146))
        self.assertAlmostEqual(lrs.negative, 95.4, delta=0.02 * 95.4)

    def test_single_analysis(self):
        """Test that a fixed design's positive ratio is power over FWER."""
        design = build_design([1.0], 0.05, 0.7, events=[250], n_total=500, target_power=0.8)
        for convention in ("conditional", "incremental", "marginal"):
            lrs = analysis_likelihood_ratios(design, convention)
            self.assertAlmostEqual(lrs.positive[0], 16.0, delta=1e-4)

    def test_conventions_agree_at_interim(self):
        """Test that conditional and incremental ratios coincide at the first analysis."""
        design = phase3_design(0.90, 680)
        conditional = analysis_likelihood_ratios(design, "conditional")
        incremental = analysis_likelihood_ratios(design, "incremental")
        self.assertAlmostEqual(conditional.positive[0], incremental.positive[0], places=9)
        self.assertNotAlmostEqual(conditional.positive[1], incremental.positive[1], places=2)

    def test_degenerate_power(self):
        """Test that cumulative power 1 raises."""
        design = phase3_design(0.90, 680)
        with patch("equical.gs_design.first_crossing_probs", side_effect=[[0.6, 0.4], [0.01, 0.015]]):
            with self.assertRaises(DegenerateError):
                analysis_likelihood_ratios(design)

    def test_unknown_convention(self):
        """Test convention validation."""
        with self.assertRaises(DomainError):
            analysis_likelihood_ratios(phase3_design(0.90, 680), "cumulative")


class TestEventsAndSampleSize(unittest.TestCase):
    """Test cases for event and sample-size search."""

    def test_fixed_design_events(self):
        """Test the fixed-design event count."""
        self.assertEqual(required_events(0.7, 0.025, 0.90), 331)

    def test_interim_inflation(self):
        """Test that an OBF interim inflates events by less than 3%."""
        events = required_events(0.7, 0.025, 0.90, [0.7, 1.0])
        self.assertGreater(events, 331)
        self.assertLess(events, 331 * 1.03)

    def test_no_effect(self):
        """Test that hazard ratios at or near 1 fail."""
        with self.assertRaises(DomainError):
            required_events(1.0, 0.025, 0.9)
        with self.assertRaises(DomainError):
            required_events(0.9999, 0.025, 0.9)

    def test_sample_sizes(self):
        """Test participants needed at the published final event fraction."""
        for power, n_total in ((0.90, 680), (0.95, 826), (0.99, 1146)):
            n = required_sample_size(0.7, 0.025, power, [0.7, 1.0], 0.52)
            self.assertAlmostEqual(n, n_total, delta=0.1 * n_total)

    def test_critical_values(self):
        """Test hazard-ratio critical values."""
        self.assertAlmostEqual(hr_critical_value(2.004, 354), 0.808, delta=1e-3)
        self.assertAlmostEqual(hr_critical_value(2.438, 245), 0.732, delta=1e-3)
        self.assertEqual(hr_critical_value(0.0, 100), 1.0)
        self.assertEqual(hr_critical_value(math.inf, 100), 0.0)
        with self.assertRaises(DomainError):
            hr_critical_value(2.0, 0)


class TestEventFraction(unittest.TestCase):
    """Test cases for expected event fractions."""

    def setUp(self):
        """Set up 24 months of uniform accrual."""
        self.acc = AccrualModel(24.0, 42.0)

    def test_after_accrual(self):
        """Test an analysis after accrual ends."""
        self.assertAlmostEqual(expected_event_fraction(self.acc, 10.0, 42.0), 0.860, delta=1e-3)

    def test_limits(self):
        """Test time zero and infinite follow-up."""
        self.assertEqual(expected_event_fraction(self.acc, 10.0, 0.0), 0.0)
        self.assertEqual(expected_event_fraction(self.acc, 10.0, math.inf), 1.0)

    def test_continuity_at_end_of_accrual(self):
        """Test that both regimes meet at the end of accrual."""
        self.assertAlmostEqual(expected_event_fraction(self.acc, 10.0, 24.0 - 1e-9),
                               expected_event_fraction(self.acc, 10.0, 24.0), places=8)

    def test_dataclass_is_frozen(self):
        """Test immutability of the accrual model."""
        with self.assertRaises(dataclasses.FrozenInstanceError):
            self.acc.accrual_months = 12.0


if __name__ == "__main__":
    unittest.main()
