"""
Design spec file module for equical.
Parses and validates JSON design documents and turns them into design objects.
"""

import json
import logging
import re
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

from equical.calibration import CdpCandidate
from equical.config import get_config
from equical.equipoise import (
    BP11,
    EquipoiseModel,
    JointEquipoiseModel,
    named_model,
    product_quantile,
)
from equical.exceptions import DomainError, SpecValidationError
from equical.gs_design import (
    AccrualModel,
    GroupSequentialDesign,
    analysis_likelihood_ratios,
    build_design,
    expected_event_fraction,
    obf_spending,
    pocock_spending,
)
from equical.odds import CdpOddsReport, OperatingCharacteristics, cdp_odds
from equical.prop_design import (
    TwoProportionDesign,
    VarianceConvention,
    critical_difference,
    design_two_props,
    power_two_props,
)
from equical.reference import CDP_PERCENTILE, PHASE3_FOLLOWUP_MONTHS, PHASE3_SOC_MEDIAN_MONTHS

logger = logging.getLogger(__name__)

SCHEMA = "equical/v1"
KINDS = ("oc", "gs", "two_prop", "cdp", "cdp_set")
SPENDING = {"obf": obf_spending, "pocock": pocock_spending}

OC_KEYS = {"name", "alpha", "power", "prior_odds", "model"}
GS_KEYS = {
    "name", "fwer", "hr_alt", "soc_median_months", "info_fractions", "n_total", "target_power",
    "event_fractions", "events", "accrual_months", "followup_months", "sides", "spending", "model",
}
TWO_PROP_KEYS = {
    "name", "p_soc", "p_inv", "alpha_one_sided", "power", "n_per_arm", "variance_convention",
    "continuity_correction", "model",
}
CDP_KEYS = {"name", "phase2", "phase3", "joint_model", "prior_odds", "percentile"}
CDP_SET_KEYS = {"name", "candidates", "joint_model", "percentile", "threshold"}

_WHITESPACE = re.compile(r"[ \t\n\r]*")
_DECODER = json.JSONDecoder()


@dataclass(frozen=True)
class DesignSpecFile:
    """A validated design document: its kind, display name, body and the design built from it."""

    kind: str
    name: str
    body: Dict[str, Any]
    source: str = field(default="", repr=False)
    design: Any = field(default=None, repr=False, compare=False)


@dataclass(frozen=True)
class CdpPlan:
    """Phase 2 and phase 3 designs of one development plan with its joint equipoise model."""

    name: str
    phase2: TwoProportionDesign
    phase3: GroupSequentialDesign
    joint: JointEquipoiseModel
    prior_odds: float = 1.0
    percentile: float = CDP_PERCENTILE

    @property
    def n_total(self) -> int:
        return self.phase2.n_total + self.phase3.n_total

    def report(self, convention: Optional[str] = None) -> CdpOddsReport:
        convention = convention or get_config()["odds"]["lr_convention"]
        lrs = analysis_likelihood_ratios(self.phase3, convention)
        phase2 = OperatingCharacteristics(self.phase2.alpha_one_sided, self.phase2.power)
        return cdp_odds(phase2, lrs.positive, lrs.negative, self.prior_odds)


class _Locator:
    """Parses a JSON text recording the line of every object and of each of its members."""

    def __init__(self, text: str):
        self.text = text
        self.objects: Dict[int, Tuple[int, Dict[str, int]]] = {}
        self.document, _ = self._value(self._skip(0))

    def _skip(self, index: int) -> int:
        return _WHITESPACE.match(self.text, index).end()

    def _line(self, index: int) -> int:
        return self.text.count("\n", 0, index) + 1

    def _value(self, index: int) -> Tuple[Any, int]:
        char = self.text[index]
        if char == "{":
            return self._object(index)
        if char == "[":
            return self._array(index)
        return _DECODER.raw_decode(self.text, index)

    def _object(self, start: int) -> Tuple[Dict[str, Any], int]:
        members: Dict[str, Any] = {}
        lines: Dict[str, int] = {}
        index = self._skip(start + 1)
        while self.text[index] != "}":
            key_line = self._line(index)
            key, index = _DECODER.raw_decode(self.text, index)
            index = self._skip(self._skip(index) + 1)
            members[key], index = self._value(index)
            lines[key] = key_line
            index = self._skip(index)
            if self.text[index] == ",":
                index = self._skip(index + 1)
        self.objects[id(members)] = (self._line(start), lines)
        return members, index + 1

    def _array(self, start: int) -> Tuple[List[Any], int]:
        items: List[Any] = []
        index = self._skip(start + 1)
        while self.text[index] != "]":
            value, index = self._value(index)
            items.append(value)
            index = self._skip(index)
            if self.text[index] == ",":
                index = self._skip(index + 1)
        return items, index + 1

    def line_of(self, obj: Any, key: Optional[str] = None) -> Optional[int]:
        """Line of `key` inside `obj`, or of the opening brace of `obj` when the key is absent."""
        if id(obj) not in self.objects:
            return None
        opening, lines = self.objects[id(obj)]
        return lines.get(key, opening) if key else opening


class _Validator:
    """Key and value checks on one JSON object that report the line of the offending member."""

    def __init__(self, body: Any, locator: Optional[_Locator] = None, where: str = "the document"):
        self.body = body
        self.locator = locator
        self.where = where
        self.envelope: set = set()

    def fail(self, message: str, key: Optional[str] = None) -> SpecValidationError:
        line = self.locator.line_of(self.body, key) if self.locator else None
        return SpecValidationError(message, line=line, key=key)

    def child(self, key: str, where: str) -> "_Validator":
        if key not in self.body:
            raise self.fail(f"missing required key {key!r} in {self.where}")
        value = self.body[key]
        if not isinstance(value, dict):
            raise self.fail(f"{key!r} must be a JSON object", key)
        return _Validator(value, self.locator, where)

    def items(self, key: str, where: str) -> List["_Validator"]:
        values = self.body.get(key)
        if not isinstance(values, list):
            raise self.fail(f"{key!r} must be a list of objects", key)
        for value in values:
            if not isinstance(value, dict):
                raise self.fail(f"{key!r} entries must be JSON objects, got {value!r}", key)
        return [_Validator(value, self.locator, f"{where} {i + 1}") for i, value in enumerate(values)]

    def check_keys(self, allowed: set) -> None:
        if not isinstance(self.body, dict):
            raise self.fail(f"{self.where} must be a JSON object")
        for key in self.body:
            if key not in allowed and key not in self.envelope:
                raise self.fail(f"unknown key {key!r} in {self.where}", key)

    def number(self, key: str, required: bool = True, default: Optional[float] = None) -> Optional[float]:
        if key not in self.body:
            if required:
                raise self.fail(f"missing required key {key!r} in {self.where}")
            return default
        value = self.body[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise self.fail(f"{key!r} must be a number, got {value!r}", key)
        return float(value)

    def positive(self, key: str, required: bool = True, default: Optional[float] = None) -> Optional[float]:
        value = self.number(key, required, default)
        if value is not None and not value > 0:
            raise self.fail(f"{key!r} must be positive, got {value}", key)
        return value

    def probability(self, key: str, required: bool = True, default: Optional[float] = None) -> Optional[float]:
        value = self.number(key, required, default)
        if value is not None and not 0.0 < value < 1.0:
            raise self.fail(f"{key!r} must lie in (0, 1), got {value}", key)
        return value

    def integer(self, key: str, required: bool = True) -> Optional[int]:
        value = self.number(key, required)
        if value is None:
            return None
        if value != int(value) or value <= 0:
            raise self.fail(f"{key!r} must be a positive integer, got {self.body[key]!r}", key)
        return int(value)

    def fractions(self, key: str, required: bool = True) -> Optional[List[float]]:
        if key not in self.body:
            if required:
                raise self.fail(f"missing required key {key!r} in {self.where}")
            return None
        values = self.body[key]
        if not isinstance(values, list) or not values:
            raise self.fail(f"{key!r} must be a non-empty list", key)
        for v in values:
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not 0.0 < v <= 1.0:
                raise self.fail(f"{key!r} entries must lie in (0, 1], got {v!r}", key)
        return [float(v) for v in values]

    def model(self, key: str = "model") -> EquipoiseModel:
        if key not in self.body:
            return BP11
        try:
            return named_model(str(self.body[key]))
        except DomainError as e:
            raise self.fail(str(e), key) from e

    def joint(self, key: str = "joint_model") -> JointEquipoiseModel:
        if key not in self.body:
            return JointEquipoiseModel(BP11, BP11)
        value = self.body[key]
        try:
            if isinstance(value, str):
                m = named_model(value)
                return JointEquipoiseModel(m, m)
            if isinstance(value, dict) and set(value) == {"phase2", "phase3"}:
                return JointEquipoiseModel(named_model(str(value["phase2"])), named_model(str(value["phase3"])))
        except DomainError as e:
            raise self.fail(str(e), key) from e
        raise self.fail(f"{key!r} must be a model name or an object with phase2 and phase3", key)


def parse_spec(text: str) -> DesignSpecFile:
    """
    Parse and validate a design document.

    The design is built during validation and kept on the returned document, so `build`
    does not repeat the work.

    Args:
        text (str): JSON text

    Returns:
        DesignSpecFile: The validated document

    Raises:
        SpecValidationError: On malformed JSON, a wrong schema, unknown keys or invalid values
    """
    try:
        json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecValidationError(f"invalid JSON: {e.msg}", line=e.lineno) from e

    locator = _Locator(text)
    document = locator.document
    v = _Validator(document, locator)
    if not isinstance(document, dict):
        raise v.fail("a design document must be a JSON object")
    if document.get("schema") != SCHEMA:
        raise v.fail(f"'schema' must be {SCHEMA!r}, got {document.get('schema')!r}", "schema")
    kind = document.get("kind")
    if kind not in KINDS:
        raise v.fail(f"'kind' must be one of {list(KINDS)}, got {kind!r}", "kind")

    v.where = f"a {kind} document"
    v.envelope = {"schema", "kind"}
    body = {k: val for k, val in document.items() if k not in ("schema", "kind")}
    design = _BUILDERS[kind](v)
    return DesignSpecFile(kind, str(body.get("name", kind)), body, text, design)


def load_spec(path: str) -> DesignSpecFile:
    """Read and validate a design document from a file; OSError propagates."""
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    spec = parse_spec(text)
    logger.info(f"Loaded {spec.kind} spec {spec.name!r} from {path}")
    return spec


def _oc(v: _Validator) -> OperatingCharacteristics:
    v.check_keys(OC_KEYS)
    alpha = v.probability("alpha")
    power = v.number("power")
    if not 0.0 < power <= 1.0:
        raise v.fail(f"'power' must lie in (0, 1], got {power}", "power")
    v.positive("prior_odds", required=False)
    v.model()
    return OperatingCharacteristics(alpha, power)


def _gs(v: _Validator) -> GroupSequentialDesign:
    v.check_keys(GS_KEYS)
    body = v.body
    fwer = v.probability("fwer")
    hr_alt = v.probability("hr_alt")
    median = v.positive("soc_median_months", required=False, default=PHASE3_SOC_MEDIAN_MONTHS)
    fractions = v.fractions("info_fractions", required=False) or [1.0]
    n_total = v.integer("n_total", required=False)
    target_power = v.probability("target_power", required=False)
    event_fractions = v.fractions("event_fractions", required=False)
    sides = int(v.number("sides", required=False, default=2))
    spending = body.get("spending", "obf")
    if spending not in SPENDING:
        raise v.fail(f"'spending' must be one of {sorted(SPENDING)}, got {spending!r}", "spending")
    v.model()
    acc = AccrualModel(v.positive("accrual_months", required=False,
                                  default=get_config()["simulation"]["accrual_months"]),
                       v.positive("followup_months", required=False, default=PHASE3_FOLLOWUP_MONTHS))

    events = None
    if "events" in body:
        events = body["events"]
        if not isinstance(events, list) or any(isinstance(d, bool) or not isinstance(d, int) or d <= 0
                                               for d in events):
            raise v.fail("'events' must be a list of positive integers", "events")
    elif event_fractions is None:
        # pooled over the two arms under the design hazard ratio
        final = 0.5 * (expected_event_fraction(acc, median, acc.followup_months)
                       + expected_event_fraction(acc, median / hr_alt, acc.followup_months))
        event_fractions = [t * final for t in fractions]
    if n_total is None and target_power is None:
        raise v.fail(f"{v.where} needs 'n_total' or 'target_power'")

    try:
        return build_design(fractions, fwer, hr_alt, n_total=n_total, events=events,
                            event_fractions=event_fractions, target_power=target_power,
                            soc_median_months=median, sides=sides, spending=SPENDING[spending])
    except DomainError as e:
        raise v.fail(f"invalid gs design: {e}") from e


def _two_prop(v: _Validator) -> TwoProportionDesign:
    v.check_keys(TWO_PROP_KEYS)
    body = v.body
    p_soc = v.probability("p_soc")
    p_inv = v.probability("p_inv")
    alpha = v.probability("alpha_one_sided")
    n_per_arm = v.integer("n_per_arm", required=False)
    power = v.probability("power", required=n_per_arm is None)
    cc = body.get("continuity_correction", False)
    if not isinstance(cc, bool):
        raise v.fail("'continuity_correction' must be true or false", "continuity_correction")
    try:
        convention = VarianceConvention(body.get("variance_convention", "pooled-null"))
    except ValueError as e:
        raise v.fail(f"unknown variance convention {body['variance_convention']!r}",
                     "variance_convention") from e
    v.model()

    try:
        if n_per_arm is None:
            return design_two_props(p_soc, p_inv, alpha, power, convention, cc)
        return TwoProportionDesign(
            p_soc=p_soc,
            p_inv=p_inv,
            alpha_one_sided=alpha,
            power=power if power is not None else power_two_props(p_soc, p_inv, alpha, n_per_arm),
            n_per_arm=n_per_arm,
            critical_difference=critical_difference(p_soc, p_inv, alpha, n_per_arm, convention),
            variance_convention=convention,
            continuity_correction=cc,
        )
    except DomainError as e:
        raise v.fail(f"invalid two_prop design: {e}") from e


def _cdp(v: _Validator) -> CdpPlan:
    v.check_keys(CDP_KEYS)
    return CdpPlan(
        name=str(v.body.get("name", "cdp")),
        phase2=_two_prop(v.child("phase2", "the phase2 design")),
        phase3=_gs(v.child("phase3", "the phase3 design")),
        joint=v.joint(),
        prior_odds=v.positive("prior_odds", required=False, default=1.0),
        percentile=v.probability("percentile", required=False, default=CDP_PERCENTILE),
    )


def _cdp_set(v: _Validator) -> List[CdpPlan]:
    v.check_keys(CDP_SET_KEYS)
    v.joint()
    v.probability("percentile", required=False)
    v.positive("threshold", required=False)
    return [_cdp(c) for c in v.items("candidates", "candidate")]


_BUILDERS = {"oc": _oc, "gs": _gs, "two_prop": _two_prop, "cdp": _cdp, "cdp_set": _cdp_set}


def build(spec: DesignSpecFile):
    """Design object of a validated document: OperatingCharacteristics, a design, a CdpPlan or a list of plans."""
    if spec.design is not None:
        return spec.design
    return _BUILDERS[spec.kind](_Validator(spec.body, where=f"a {spec.kind} document"))


def search_threshold(spec: DesignSpecFile, threshold: Optional[float] = None,
                     percentile: Optional[float] = None) -> float:
    """Joint odds threshold for a cdp_set search; explicit arguments override the document."""
    if threshold is not None:
        return threshold
    if percentile is None and "threshold" in spec.body:
        return float(spec.body["threshold"])
    joint = _Validator(spec.body).joint()
    p = percentile if percentile is not None else float(spec.body.get("percentile", CDP_PERCENTILE))
    return product_quantile(joint, p).value


def candidates(plans: Sequence[CdpPlan], convention: Optional[str] = None) -> List[CdpCandidate]:
    return [CdpCandidate(plan.name, plan.n_total, plan.report(convention)) for plan in plans]
