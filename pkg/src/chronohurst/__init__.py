"""Long-memory and cyclicity analysis of monthly count series."""

from .errors import ChronoHurstError, InputError, NumericError
from .series import (MonthlySeries, correlation_function, descriptive_stats, difference,
                     load_bundled, load_monthly_csv, ndiffs)
from .synth import GeneratorSpec, generate, theoretical_fgn_acf
from .hurst import che, rs_hurst, segment_che, whittle_hurst
from .wavelet import (dominant_periods, find_frequency, global_spectrum, morlet_cwt, ridges,
                      significance)

__version__ = "0.1.0"

__all__ = [
    "ChronoHurstError", "InputError", "NumericError",
    "MonthlySeries", "load_monthly_csv", "load_bundled", "difference",
    "descriptive_stats", "correlation_function", "ndiffs",
    "GeneratorSpec", "generate", "theoretical_fgn_acf",
    "rs_hurst", "whittle_hurst", "che", "segment_che",
    "morlet_cwt", "significance", "ridges", "global_spectrum", "dominant_periods",
    "find_frequency",
]
