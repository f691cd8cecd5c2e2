"""
Unit tests for the tables module.
"""

import os
import tempfile
import unittest

import pandas as pd
from pandas.testing import assert_frame_equal

from equical import reference as ref
from equical.tables import figure1, table1, table2, table3, table4, write_table


class TestSmallTables(unittest.TestCase):
    """Test cases for the single-trial tables and figure data."""

    def test_table1(self):
        """Test odds and percentiles of the reference designs."""
        frame = table1()
        self.assertEqual(list(frame.columns), ref.TABLE1_HEADER)
        self.assertEqual(len(frame), 4)
        self.assertAlmostEqual(frame["odds"].iloc[-1], 99.0, places=9)
        self.assertAlmostEqual(frame["percentile"].iloc[-1], 0.99, places=9)

    def test_table3(self):
        """Test the joint threshold at the 95th percentile."""
        frame = table3()
        self.assertEqual(list(frame["percentile"]), ref.TABLE3_PERCENTILES)
        row = frame[frame["percentile"] == 0.95].iloc[0]
        self.assertAlmostEqual(row["threshold"], 66.1, delta=0.005 * 66.1)

    def test_figure1(self):
        """Test grid size and the BP(1,1) CDF at odds 18."""
        frame = figure1()
        self.assertEqual(list(frame.columns), ref.FIGURE1_HEADER)
        self.assertEqual(len(frame), len(ref.FIGURE1_GRID))
        value = frame.loc[frame["odds"] == 18.0, "cdf_bp11"].iloc[0]
        self.assertAlmostEqual(value, 0.9474, delta=1e-4)
        self.assertTrue(frame["cdf_bp12"].is_monotonic_increasing)


class TestDesignTables(unittest.TestCase):
    """Test cases for the confirmatory design and development plan tables."""

    @classmethod
    def setUpClass(cls):
        """Build the two design tables once."""
        cls.table2 = table2("conditional")
        cls.table4 = table4("conditional")
        cls.table4_marginal = table4("marginal")

    def test_table2_columns(self):
        """Test critical values and negative odds of each power row."""
        frame = self.table2
        self.assertEqual(list(frame.columns), ref.TABLE2_HEADER)
        self.assertEqual(frame["n_pct"].iloc[0], 100.0)
        for _, row in frame.iterrows():
            self.assertLess(row["hr_cv_ia"], row["hr_cv_fa"])
            expected = (1 - 0.05) / (1 - row["power"])
            self.assertAlmostEqual(row["r01_fa"], expected, delta=1e-3 * expected)
        first = frame.iloc[0]
        self.assertAlmostEqual(first["hr_cv_ia"], 0.73, delta=0.015)
        self.assertAlmostEqual(first["hr_cv_fa"], 0.81, delta=0.015)
        self.assertAlmostEqual(first["r10_ia"], 43.3, delta=4.33)
        self.assertAlmostEqual(first["r10_fa"], 19.7, delta=1.97)

    def test_table4_negative_odds(self):
        """Test odds after a negative phase 3 outcome."""
        frame = self.table4
        for got, expected in zip(frame["r01_pn"], (0.60, 0.27, 1.2, 2.4, 12.4)):
            self.assertAlmostEqual(got, expected, delta=0.05 * expected)
        for got, expected in zip(frame["r01_nn"], (21, 45, 43, 86, 446)):
            self.assertAlmostEqual(got, expected, delta=0.02 * expected)

    def test_table4_phase2_sizes(self):
        """Test phase 2 sizes and plan totals."""
        frame = self.table4
        self.assertEqual(list(frame["n_phase2"]), [102, 192, 102, 102, 102])
        self.assertEqual(list(frame["n_total"]), list(frame["n_phase2"] + frame["n_phase3"]))

    def test_table4_double_positive_odds(self):
        """Test final-analysis double-positive odds under both conventions."""
        expected = dict(zip(frame_names(), (140, 316, 158, 167, 843)))
        for _, row in self.table4.iterrows():
            tolerance = 0.15 if row["design"] == "Robust" else 0.10
            self.assertAlmostEqual(row["r10_pp_fa"], expected[row["design"]],
                                   delta=tolerance * expected[row["design"]])
        for _, row in self.table4_marginal.iterrows():
            self.assertAlmostEqual(row["r10_pp_fa"], expected[row["design"]], delta=0.05 * expected[row["design"]])

    def test_write_round_trip(self):
        """Test that written CSV reads back to the same values."""
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "table3.csv")
            written = write_table("table3", path)
            assert_frame_equal(pd.read_csv(path), written, check_exact=False, rtol=1e-14)

    def test_unknown_target(self):
        """Test an unknown target."""
        with self.assertRaises(KeyError):
            write_table("table9", "unused.csv")


def frame_names():
    return [name for name, *_ in ref.TABLE4_DESIGNS]


if __name__ == "__main__":
    unittest.main()
