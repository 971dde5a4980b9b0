#pragma once

#include <vector>

#include "subdiff/core.hpp"

namespace subdiff {

struct PowerFit {
    double exponent = 0;
    double prefactor = 0;
    double residual = 0;  // weighted rms of the log residuals
    int points = 0;
};

// least squares of log v against log t over t in [lo, hi]; optional per-point weights.
// needs >= 10 points spanning at least a decade
PowerFit fit_power_law(const Series& s, double lo, double hi, const std::vector<double>& weights = {});

// prefactor c of c t^a with the exponent a held fixed
PowerFit fit_prefactor(const Series& s, double lo, double hi, double exponent, const std::vector<double>& weights = {});

// plain slope of log y vs log x (no window rules; used for rate fits over a handful of eps)
PowerFit loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace subdiff
