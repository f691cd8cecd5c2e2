"""
Equical package.
Equipoise calibration of clinical trial designs: pre-study equipoise models, post-study odds
for single trials and two-study development plans, and design calibration.
"""

__version__ = "0.1.0"
