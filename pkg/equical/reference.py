"""
Reference module for equical.
Published design settings reproduced by the table and figure commands, and the CSV headers
they are written with.
"""

# (false positive rate, power) of the single-trial designs
TABLE1_DESIGNS = [
    (0.10, 0.90),
    (0.05, 0.90),
    (0.05, 0.95),
    (0.01, 0.99),
]

# Confirmatory time-to-event design: one interim at 70% information, OBF spending
PHASE3_INFO_FRACTIONS = [0.7, 1.0]
PHASE3_EVENT_FRACTIONS = [0.36, 0.52]  # share of participants with an event at IA and FA
PHASE3_FWER = 0.05
PHASE3_HR_ALT = 0.7
PHASE3_SOC_MEDIAN_MONTHS = 10.0
PHASE3_FOLLOWUP_MONTHS = 42.0

# (target power, planned participants)
TABLE2_DESIGNS = [
    (0.90, 680),
    (0.95, 826),
    (0.99, 1146),
]

TABLE3_PERCENTILES = [0.50, 0.80, 0.85, 0.90, 0.95, 0.975, 0.99]

# Randomised phase 2 on PFS9
PHASE2_P_SOC = 0.55
PHASE2_P_INV = 0.75

# (name, phase 2 alpha, phase 2 power, phase 3 FWER, phase 3 power, phase 3 participants)
TABLE4_DESIGNS = [
    ("Minimal", 0.10, 0.80, 0.05, 0.80, 526),
    ("Upfront", 0.05, 0.90, 0.05, 0.80, 526),
    ("Base", 0.10, 0.80, 0.05, 0.90, 680),
    ("Robust", 0.10, 0.80, 0.05, 0.95, 826),
    ("Robust-1%", 0.10, 0.80, 0.01, 0.99, 1484),
]

# Percentile of the joint equipoise model that a CDP must clear
CDP_PERCENTILE = 0.95

FIGURE1_MODELS = ["bp11", "bp0505", "bp12"]
FIGURE1_GRID = [round(0.05 * i, 2) for i in range(1, 20)] + [float(i) for i in range(1, 201)]

TABLE1_HEADER = ["alpha", "power", "odds", "percentile"]
TABLE2_HEADER = ["power", "n_total", "n_pct", "hr_cv_ia", "hr_cv_fa", "r10_ia", "r10_fa", "r01_fa"]
TABLE3_HEADER = ["percentile", "threshold"]
TABLE4_HEADER = [
    "design", "n_total", "n_phase2", "n_phase3", "alpha2", "alpha3", "power2", "power3",
    "cv_ph2", "hr_cv_ia", "hr_cv_fa", "r10_pp_ia", "r10_pp_fa", "r01_pn",
    "r10_np_ia", "r10_np_fa", "r01_nn",
]
FIGURE1_HEADER = ["odds", "cdf_bp11", "cdf_bp0505", "cdf_bp12"]
SIMULATION_HEADER = ["name", "estimate", "se", "replicates", "seed"]
