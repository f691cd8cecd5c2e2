"""
Command-line interface for equical.
Subcommands: reproduce (tables and figure data as CSV), eval (a JSON design document),
calibrate (power or false positive rate for an equipoise target) and search (smallest
development plan clearing a joint threshold).
"""

import argparse
import logging
import sys
from typing import Optional, Sequence

from equical import __version__
from equical.calibration import (
    CalibrationTarget,
    calibrate,
    cdp_search,
    max_alpha,
    max_alpha_negative,
)
from equical.config import get_config
from equical.equipoise import JointEquipoiseModel, equipoise_percentile, named_model
from equical.exceptions import ConfigurationError, ConvergenceError, DomainError, SpecValidationError
from equical.gs_design import (
    GroupSequentialDesign,
    analysis_likelihood_ratios,
    event_drift,
    first_crossing_probs,
)
from equical.odds import OperatingCharacteristics, outcome_percentiles, post_odds_negative, post_odds_positive
from equical.prop_design import TwoProportionDesign, exact_rejection_probability
from equical.reporting import format_odds, format_percentile, format_probability, format_table
from equical.simulation import simulate_gs_tte, simulate_two_prop
from equical.spec_file import CdpPlan, build, candidates, load_spec, search_threshold
from equical.tables import TARGETS, write_table

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_CONVERGENCE = 4

ANTI_INFORMATIVE = "warning: outcome is anti-informative (power <= alpha)"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="equical", description="Equipoise calibration of clinical trial designs")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    reproduce = sub.add_parser("reproduce", help="write a published table or figure data as CSV")
    reproduce.add_argument("target", choices=sorted(TARGETS))
    reproduce.add_argument("--out", help="output path (standard output if omitted)")

    evaluate = sub.add_parser("eval", help="evaluate a JSON design document")
    evaluate.add_argument("spec")
    evaluate.add_argument("--simulate", type=int, metavar="N", help="append Monte Carlo columns from N replicates")
    evaluate.add_argument("--seed", type=int, help="simulation seed")

    cal = sub.add_parser("calibrate", help="calibrate power or false positive rate to an equipoise target")
    cal.add_argument("--model", required=True, help="bp11, bp0505 or bp12")
    cal.add_argument("--joint", action="store_true", help="use the product of two independent copies of the model")
    cal.add_argument("--percentile", type=float, required=True)
    given = cal.add_mutually_exclusive_group(required=True)
    given.add_argument("--alpha", type=float, help="solve for the required power")
    given.add_argument("--power", type=float, help="solve for the largest false positive rate")
    cal.add_argument("--direction", choices=["+", "-"], default="+")
    cal.add_argument("--prior-odds", type=float, default=1.0)

    search = sub.add_parser("search", help="smallest development plan clearing a joint threshold")
    search.add_argument("spec")
    limit = search.add_mutually_exclusive_group()
    limit.add_argument("--threshold", type=float)
    limit.add_argument("--percentile", type=float)
    return parser


def cmd_reproduce(target: str, out_path: Optional[str]) -> int:
    if out_path is None:
        sys.stdout.write(TARGETS[target]().to_csv(index=False))
        return EXIT_OK
    write_table(target, out_path)
    print(f"wrote {target} to {out_path}")
    return EXIT_OK


def _print_oc(oc: OperatingCharacteristics, prior_odds: float, model_name: str) -> None:
    model = named_model(model_name)
    if not oc.informative:
        print(ANTI_INFORMATIVE)
    outcomes = [post_odds_positive(oc, prior_odds)]
    if oc.power < 1.0:
        outcomes.append(post_odds_negative(oc, prior_odds))
    rows = [
        {"outcome": o.outcome.value, "favors": o.favors.value, "odds": format_odds(o.value),
         model.label: format_percentile(equipoise_percentile(model, o.value))}
        for o in outcomes
    ]
    print(f"alpha {format_probability(oc.alpha)}, power {format_probability(oc.power)}")
    print(format_table(rows))


def _print_gs(design: GroupSequentialDesign, simulate: Optional[int], seed: Optional[int],
              model_name: str = "bp11") -> None:
    model = named_model(model_name)
    convention = get_config()["odds"]["lr_convention"]
    h1 = first_crossing_probs(design, design.drift)
    h0 = [design.sides * p for p in first_crossing_probs(design, 0.0)]
    lrs = analysis_likelihood_ratios(design, convention)
    rows = []
    for k, a in enumerate(design.analyses):
        rows.append({
            "analysis": k + 1,
            "info": f"{a.info_fraction:g}",
            "events": a.events,
            "z": f"{a.z_boundary:.4f}",
            "hr_cv": f"{a.hr_critical:.3f}",
            "p_h1": format_probability(h1[k]),
            "p_h0": format_probability(h0[k]),
            "r10": format_odds(lrs.positive[k]),
            model.label: format_percentile(equipoise_percentile(model, lrs.positive[k])),
        })
    if simulate:
        # analytic counterpart of the simulated alternative at hr_alt
        hr_drift = event_drift(design.hr_alt, design.events[-1])
        at_hr = first_crossing_probs(design, hr_drift)
        sim1 = simulate_gs_tte(design, design.hr_alt, None, simulate, seed)
        sim0 = simulate_gs_tte(design, 1.0, None, simulate, seed)
        for k, row in enumerate(rows):
            row["p_hr"] = format_probability(at_hr[k])
            # the simulated null covers the upper tail only
            row["sim_h1"] = format_probability(sim1.estimates[f"reject_{k + 1}"])
            row["sim_h0"] = format_probability(design.sides * sim0.estimates[f"reject_{k + 1}"])
    print(f"N {design.n_total}, fwer {design.fwer:g} over {design.sides} side(s), HR {design.hr_alt:g}, "
          f"drift {design.drift:.4f}, power {format_probability(lrs.power)} ({convention} likelihood ratios)")
    print(format_table(rows))
    if simulate:
        print(f"simulated at HR {design.hr_alt:g} (drift {hr_drift:.4f}), {simulate} replicates, seed {sim1.seed}")
    print(f"r01 after a negative outcome: {format_odds(lrs.negative)} "
          f"({model.label} percentile {format_percentile(equipoise_percentile(model, lrs.negative))})")


def _print_two_prop(design: TwoProportionDesign, simulate: Optional[int], seed: Optional[int],
                    model_name: str = "bp11") -> None:
    exact_h0 = exact_rejection_probability(design, design.p_soc, design.p_soc)
    exact_h1 = exact_rejection_probability(design, design.p_soc, design.p_inv)
    print(f"{design.p_soc:g} vs {design.p_inv:g}: n {design.n_per_arm}/arm ({design.n_total} total), "
          f"critical difference {design.critical_difference:.4f} ({design.variance_convention.value})")
    row = {
        "alpha": format_probability(design.alpha_one_sided),
        "power": format_probability(design.power),
        "achieved": format_probability(design.achieved_power),
        "exact_h0": format_probability(exact_h0),
        "exact_h1": format_probability(exact_h1),
    }
    if simulate:
        row["sim_h0"] = format_probability(simulate_two_prop(design, design.p_soc, design.p_soc, simulate, seed)
                                           .estimates["reject"])
        row["sim_h1"] = format_probability(simulate_two_prop(design, design.p_soc, design.p_inv, simulate, seed)
                                           .estimates["reject"])
    print(format_table([row]))
    _print_oc(OperatingCharacteristics(design.alpha_one_sided, design.power), 1.0, model_name)


def _print_cdp(plan: CdpPlan, simulate: Optional[int], seed: Optional[int]) -> None:
    report = plan.report()
    percentiles = outcome_percentiles(report, plan.joint)
    print(f"CDP {plan.name}: N {plan.n_total} (phase 2 {plan.phase2.n_total}, phase 3 {plan.phase3.n_total}), "
          f"joint model {plan.joint.label}")
    rows = [
        {"outcome": "(+2,+3)", "favors": "H1", "odds_ia": format_odds(report.r10_pp[0].value),
         "odds_fa": format_odds(report.r10_pp_final.value)},
        {"outcome": "(+2,-3)", "favors": "H0", "odds_ia": "", "odds_fa": format_odds(report.r01_pn.value)},
        {"outcome": "(-2,+3)", "favors": "H1", "odds_ia": format_odds(report.r10_np[0].value),
         "odds_fa": format_odds(report.r10_np_final.value)},
        {"outcome": "(-2,-3)", "favors": "H0", "odds_ia": "", "odds_fa": format_odds(report.r01_nn.value)},
    ]
    for row, pct in zip(rows, percentiles.values()):
        row["percentile"] = format_percentile(pct)
    print(format_table(rows))
    if simulate:
        print()
        _print_two_prop(plan.phase2, simulate, seed)
        print()
        _print_gs(plan.phase3, simulate, seed)


def cmd_eval(spec_path: str, simulate: Optional[int] = None, seed: Optional[int] = None) -> int:
    spec = load_spec(spec_path)
    design = build(spec)
    if spec.kind == "oc":
        _print_oc(design, float(spec.body.get("prior_odds", 1.0)), str(spec.body.get("model", "bp11")))
    elif spec.kind == "gs":
        _print_gs(design, simulate, seed, str(spec.body.get("model", "bp11")))
    elif spec.kind == "two_prop":
        _print_two_prop(design, simulate, seed, str(spec.body.get("model", "bp11")))
    elif spec.kind == "cdp":
        _print_cdp(design, simulate, seed)
    else:
        for plan in design:
            _print_cdp(plan, None, None)
            print()
    return EXIT_OK


def cmd_calibrate(model: str, percentile: float, alpha: Optional[float], power: Optional[float],
                  direction: str = "+", prior_odds: float = 1.0, joint: bool = False) -> int:
    m = named_model(model)
    target = CalibrationTarget(JointEquipoiseModel(m, m) if joint else m, percentile, direction)
    label = target.model.label
    print(f"{label} at the {format_percentile(percentile)} percentile: threshold {format_odds(target.threshold)}")
    if alpha is not None:
        result = calibrate(alpha, target, prior_odds)
        if result.feasible:
            print(f"required power {format_probability(result.value)}")
        else:
            print(f"INFEASIBLE: max alpha {format_percentile(result.limiting_value)}")
        return EXIT_OK

    if direction == "+":
        limit = max_alpha(target, power, prior_odds)
    else:
        limit = max_alpha_negative(target, power, prior_odds)
    print(f"max alpha {format_percentile(limit)} at power {format_probability(power)}")
    return EXIT_OK


def cmd_search(spec_path: str, threshold: Optional[float] = None, percentile: Optional[float] = None) -> int:
    spec = load_spec(spec_path)
    if spec.kind != "cdp_set":
        raise SpecValidationError(f"search needs a cdp_set document, got {spec.kind!r}", key="kind")
    plans = build(spec)
    target = search_threshold(spec, threshold, percentile)
    pool = candidates(plans)
    rows = [
        {"plan": c.name, "n_total": c.n_total, "r10_pp_fa": format_odds(c.report.r10_pp_final.value),
         "r01_nn": format_odds(c.report.r01_nn.value)}
        for c in pool
    ]
    print(f"joint threshold {format_odds(target)}")
    print(format_table(rows))
    best = cdp_search(pool, target)
    print(f"selected: {best.name} (N {best.n_total})" if best else "selected: none")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run the command line.

    Args:
        argv (Optional[Sequence[str]]): Arguments without the program name

    Returns:
        int: 0 on success, 2 on usage, validation or domain errors, 3 on I/O errors,
            4 on numerical non-convergence
    """
    try:
        level = get_config()["logging"]["level"]
    except ConfigurationError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=getattr(logging, level),
                        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')

    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    try:
        if args.command == "reproduce":
            return cmd_reproduce(args.target, args.out)
        if args.command == "eval":
            return cmd_eval(args.spec, args.simulate, args.seed)
        if args.command == "calibrate":
            return cmd_calibrate(args.model, args.percentile, args.alpha, args.power,
                                 args.direction, args.prior_odds, args.joint)
        return cmd_search(args.spec, args.threshold, args.percentile)
    except (SpecValidationError, DomainError, ConfigurationError) as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except ConvergenceError as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
