"""opnet - Ordinal partition networks for scalar time series.

Maps series (RR-interval tachograms or synthetic data) to forward and
time-reversed ordinal networks, computes entropy quantifiers and runs
surrogate and group-comparison hypothesis tests.
"""

__version__ = "0.1.0"
