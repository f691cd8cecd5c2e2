"""
Unit tests for the design spec file module.
"""

import json
import os
import tempfile
import unittest
from unittest.mock import patch

from equical.equipoise import BP11_JOINT, product_quantile
from equical.exceptions import SpecValidationError
from equical.gs_design import GroupSequentialDesign, build_design
from equical.odds import OperatingCharacteristics
from equical.prop_design import TwoProportionDesign
from equical.reference import PHASE3_FOLLOWUP_MONTHS, TABLE4_DESIGNS
from equical.spec_file import (
    CdpPlan,
    DesignSpecFile,
    build,
    candidates,
    load_spec,
    parse_spec,
    search_threshold,
)

GS_SPEC = """{
  "schema": "equical/v1",
  "kind": "gs",
  "name": "phase3-90",
  "fwer": 0.05,
  "hr_alt": 0.7,
  "info_fractions": [0.7, 1.0],
  "n_total": 680,
  "event_fractions": [0.36, 0.52],
  "target_power": 0.90
}"""


def phase3_body(fwer, power, n_total):
    return {"fwer": fwer, "hr_alt": 0.7, "info_fractions": [0.7, 1.0], "n_total": n_total,
            "event_fractions": [0.36, 0.52], "target_power": power}


def cdp_body(name, alpha2, power2, fwer3, power3, n3):
    return {
        "name": name,
        "phase2": {"p_soc": 0.55, "p_inv": 0.75, "alpha_one_sided": alpha2, "power": power2},
        "phase3": phase3_body(fwer3, power3, n3),
        "joint_model": "bp11",
    }


def document(kind, body):
    return json.dumps({"schema": "equical/v1", "kind": kind, **body}, indent=2)


class TestParse(unittest.TestCase):
    """Test cases for parsing and validation."""

    def test_gs_document(self):
        """Test a valid confirmatory design."""
        spec = parse_spec(GS_SPEC)
        self.assertEqual(spec.kind, "gs")
        self.assertEqual(spec.name, "phase3-90")
        design = build(spec)
        self.assertIsInstance(design, GroupSequentialDesign)
        self.assertEqual(design.events, [245, 354])

    def test_unknown_key_reports_line(self):
        """Test that an unknown key names itself and its line."""
        text = GS_SPEC.replace('"n_total": 680,', '"n_total": 680,\n  "colour": "blue",')
        with self.assertRaises(SpecValidationError) as ctx:
            parse_spec(text)
        self.assertEqual(ctx.exception.key, "colour")
        self.assertEqual(ctx.exception.line, 9)
        self.assertTrue(str(ctx.exception).startswith("line 9: "))

    def test_invalid_json(self):
        """Test malformed JSON."""
        with self.assertRaises(SpecValidationError) as ctx:
            parse_spec('{\n  "schema": "equical/v1",\n  "kind": \n}')
        self.assertEqual(ctx.exception.line, 4)

    def test_wrong_schema_and_kind(self):
        """Test schema and kind validation."""
        with self.assertRaises(SpecValidationError) as ctx:
            parse_spec(GS_SPEC.replace("equical/v1", "equical/v0"))
        self.assertEqual(ctx.exception.key, "schema")
        with self.assertRaises(SpecValidationError) as ctx:
            parse_spec(GS_SPEC.replace('"gs"', '"survival"'))
        self.assertEqual(ctx.exception.key, "kind")

    def test_bad_probability(self):
        """Test an out-of-range probability."""
        with self.assertRaises(SpecValidationError) as ctx:
            parse_spec(GS_SPEC.replace('"fwer": 0.05', '"fwer": 1.5'))
        self.assertEqual(ctx.exception.key, "fwer")
        self.assertEqual(ctx.exception.line, 5)

    def test_bad_spending(self):
        """Test an unknown spending function name."""
        text = GS_SPEC.replace('"hr_alt": 0.7,', '"hr_alt": 0.7,\n  "spending": "haybittle",')
        with self.assertRaises(SpecValidationError) as ctx:
            parse_spec(text)
        self.assertEqual(ctx.exception.key, "spending")

    def test_missing_size(self):
        """Test a design without n_total or target power."""
        body = phase3_body(0.05, 0.90, 680)
        del body["n_total"], body["target_power"]
        with self.assertRaises(SpecValidationError):
            parse_spec(document("gs", body))

    def test_followup_derived_events(self):
        """Test event fractions derived from accrual and follow-up."""
        body = phase3_body(0.05, 0.90, 680)
        del body["event_fractions"]
        body.update({"accrual_months": 24, "followup_months": 42})
        design = build(parse_spec(document("gs", body)))
        ia, fa = design.events
        self.assertGreater(fa, 0.5 * 680)
        self.assertLess(fa, 680)
        self.assertAlmostEqual(ia, 0.7 * fa, delta=2)

    def test_repeated_key_reports_its_own_line(self):
        """Test that a bad value is located in its own object, not at the first key of that name."""
        rows = [cdp_body(*row) for row in TABLE4_DESIGNS[:2]]
        rows[0]["percentile"] = 1.5
        text = document("cdp_set", {"percentile": 0.9, "candidates": rows})
        with self.assertRaises(SpecValidationError) as ctx:
            parse_spec(text)
        self.assertEqual(ctx.exception.key, "percentile")
        self.assertIn('"percentile": 1.5', text.splitlines()[ctx.exception.line - 1])

    def test_second_candidate_reports_its_own_line(self):
        """Test that an error in the second candidate points into the second candidate."""
        rows = [cdp_body(*row) for row in TABLE4_DESIGNS[:2]]
        rows[1]["phase2"]["p_inv"] = 2.0
        text = document("cdp_set", {"candidates": rows})
        with self.assertRaises(SpecValidationError) as ctx:
            parse_spec(text)
        lines = text.splitlines()
        self.assertIn('"p_inv": 2.0', lines[ctx.exception.line - 1])
        self.assertEqual(sum('"p_inv"' in line for line in lines[:ctx.exception.line]), 2)

    def test_missing_key_reports_enclosing_object(self):
        """Test that a missing key is reported at the opening brace of its object."""
        body = cdp_body("Base", 0.10, 0.80, 0.05, 0.90, 680)
        del body["phase2"]["p_soc"]
        text = document("cdp", body)
        with self.assertRaises(SpecValidationError) as ctx:
            parse_spec(text)
        self.assertIn("p_soc", str(ctx.exception))
        self.assertIsNotNone(ctx.exception.line)
        self.assertIn('"phase2": {', text.splitlines()[ctx.exception.line - 1])

    def test_default_followup_derives_events(self):
        """Test that a design without event counts uses the default follow-up."""
        body = phase3_body(0.05, 0.90, 680)
        del body["event_fractions"]
        explicit = dict(body, followup_months=PHASE3_FOLLOWUP_MONTHS)
        derived = build(parse_spec(document("gs", body)))
        self.assertEqual(derived.events, build(parse_spec(document("gs", explicit))).events)
        shorter = build(parse_spec(document("gs", dict(body, followup_months=12))))
        self.assertLess(shorter.events[-1], derived.events[-1])

    def test_build_reuses_parsed_design(self):
        """Test that a parsed document is not built a second time."""
        with patch("equical.spec_file.build_design", wraps=build_design) as builder:
            spec = parse_spec(GS_SPEC)
            first = build(spec)
            second = build(spec)
        self.assertEqual(builder.call_count, 1)
        self.assertIs(first, second)

    def test_build_without_parsed_design(self):
        """Test building a document assembled in code."""
        body = phase3_body(0.05, 0.90, 680)
        design = build(DesignSpecFile("gs", "inline", body))
        self.assertEqual(design.events, [245, 354])



class TestBuild(unittest.TestCase):
    """Test cases for building design objects."""

    def test_oc(self):
        """Test a plain operating characteristics document."""
        oc = build(parse_spec(document("oc", {"alpha": 0.05, "power": 0.9})))
        self.assertEqual(oc, OperatingCharacteristics(0.05, 0.9))

    def test_two_prop_fixed_n(self):
        """Test a binomial design with a fixed per-arm size."""
        body = {"p_soc": 0.55, "p_inv": 0.75, "alpha_one_sided": 0.10, "n_per_arm": 50}
        design = build(parse_spec(document("two_prop", body)))
        self.assertIsInstance(design, TwoProportionDesign)
        self.assertEqual(design.n_total, 100)
        self.assertAlmostEqual(design.power, 0.80, delta=0.01)
        self.assertAlmostEqual(design.critical_difference, 0.1223, delta=1e-3)

    def test_two_prop_bad_convention(self):
        """Test an unknown variance convention."""
        body = {"p_soc": 0.55, "p_inv": 0.75, "alpha_one_sided": 0.10, "power": 0.8,
                "variance_convention": "exact"}
        with self.assertRaises(SpecValidationError) as ctx:
            parse_spec(document("two_prop", body))
        self.assertEqual(ctx.exception.key, "variance_convention")

    def test_cdp_base(self):
        """Test the four outcome odds of the Base plan."""
        plan = build(parse_spec(document("cdp", cdp_body("Base", 0.10, 0.80, 0.05, 0.90, 680))))
        self.assertIsInstance(plan, CdpPlan)
        self.assertEqual(plan.n_total, 782)
        report = plan.report("conditional")
        self.assertAlmostEqual(report.r01_nn.value, 42.75, delta=0.05)
        self.assertAlmostEqual(report.r01_pn.value, 1.1875, delta=0.01)

    def test_cdp_missing_phase(self):
        """Test a plan without a phase 3 design."""
        body = cdp_body("Base", 0.10, 0.80, 0.05, 0.90, 680)
        del body["phase3"]
        with self.assertRaises(SpecValidationError):
            parse_spec(document("cdp", body))

    def test_cdp_set_search_inputs(self):
        """Test candidates and the threshold of a plan set."""
        body = {"candidates": [cdp_body(*row) for row in TABLE4_DESIGNS], "percentile": 0.95}
        spec = parse_spec(document("cdp_set", body))
        plans = build(spec)
        self.assertEqual([p.name for p in plans], [row[0] for row in TABLE4_DESIGNS])
        pool = candidates(plans, "conditional")
        self.assertEqual([c.n_total for c in pool], [p.n_total for p in plans])
        expected = product_quantile(BP11_JOINT, 0.95).value
        self.assertAlmostEqual(search_threshold(spec), expected, places=9)
        self.assertEqual(search_threshold(spec, threshold=10.0), 10.0)

    def test_load_from_file(self):
        """Test reading a document from disk."""
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "gs.json")
            with open(path, "w", encoding="utf-8") as f:
                f.write(GS_SPEC)
            self.assertEqual(load_spec(path).name, "phase3-90")
            with self.assertRaises(OSError):
                load_spec(os.path.join(tmp, "missing.json"))


if __name__ == "__main__":
    unittest.main()
