#include "subdiff/fit.hpp"

#include <cmath>

namespace subdiff {

namespace {

struct Window {
    std::vector<double> x, y, w;
};

Window select(const Series& s, double lo, double hi, const std::vector<double>& weights, bool strict) {
    if (!weights.empty() && weights.size() != s.size()) throw MismatchError("fit: weights do not match series");
    Window win;
    for (std::size_t i = 0; i < s.size(); ++i) {
        double t = s.t[i];
        if (t < lo * (1 - 1e-9) || t > hi * (1 + 1e-9)) continue;
        if (!(s.v[i] > 0)) throw DomainError("fit: values must be positive in the window");
        win.x.push_back(std::log(t));
        win.y.push_back(std::log(s.v[i]));
        win.w.push_back(weights.empty() ? 1.0 : weights[i]);
    }
    if (strict) {
        if (win.x.size() < 10) throw DomainError("fit window too narrow: fewer than 10 points");
        if (win.x.back() - win.x.front() < std::log(10.0) * (1 - 1e-9))
            throw DomainError("fit window too narrow: spans less than a decade");
    } else if (win.x.empty()) {
        throw DomainError("fit window is empty");
    }
    return win;
}

PowerFit linear_fit(const Window& win) {
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < win.x.size(); ++i) {
        double w = win.w[i];
        sw += w;
        sx += w * win.x[i];
        sy += w * win.y[i];
        sxx += w * win.x[i] * win.x[i];
        sxy += w * win.x[i] * win.y[i];
    }
    double mx = sx / sw, my = sy / sw;
    double slope = (sxy - sw * mx * my) / (sxx - sw * mx * mx);
    double icpt = my - slope * mx;
    double r = 0;
    for (std::size_t i = 0; i < win.x.size(); ++i) {
        double e = win.y[i] - icpt - slope * win.x[i];
        r += win.w[i] * e * e;
    }
    return {slope, std::exp(icpt), std::sqrt(r / sw), static_cast<int>(win.x.size())};
}

}  // namespace

PowerFit fit_power_law(const Series& s, double lo, double hi, const std::vector<double>& weights) {
    return linear_fit(select(s, lo, hi, weights, true));
}

PowerFit fit_prefactor(const Series& s, double lo, double hi, double exponent, const std::vector<double>& weights) {
    Window win = select(s, lo, hi, weights, false);
    double sw = 0, sr = 0;
    for (std::size_t i = 0; i < win.x.size(); ++i) {
        sw += win.w[i];
        sr += win.w[i] * (win.y[i] - exponent * win.x[i]);
    }
    double c = sr / sw;
    double r = 0;
    for (std::size_t i = 0; i < win.x.size(); ++i) {
        double e = win.y[i] - exponent * win.x[i] - c;
        r += win.w[i] * e * e;
    }
    return {exponent, std::exp(c), std::sqrt(r / sw), static_cast<int>(win.x.size())};
}

PowerFit loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw DomainError("slope fit needs at least two paired points");
    Window win;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0) || !(y[i] > 0)) throw DomainError("slope fit needs positive data");
        win.x.push_back(std::log(x[i]));
        win.y.push_back(std::log(y[i]));
        win.w.push_back(1.0);
    }
    return linear_fit(win);
}

}  // namespace subdiff
