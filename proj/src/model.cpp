#include "subdiff/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "subdiff/core.hpp"
#include "subdiff/special.hpp"

namespace subdiff {

namespace {

void check_alpha_delta(double alpha, double delta) {
    if (!(alpha > 0 && alpha < 1)) throw DomainError("alpha must lie in (0,1)");
    if (!(delta > 0 && delta < 1 - alpha)) throw DomainError("delta must satisfy δ∈(0,1−α)");
}

// int_{u}^{u+h} c (K+s)^-alpha ds written without cancellation
double power_tail_integral(double alpha, double K, double a, double b) {
    double base = std::pow(K + a, 1 - alpha);
    return base * std::expm1((1 - alpha) * std::log1p((b - a) / (K + a))) / (1 - alpha);
}

}  // namespace

double default_delta(double alpha) { return std::min(0.9 * (1 - alpha), 0.5); }

SurvivalModel SurvivalModel::prototype(double alpha, double K, std::optional<double> delta) {
    if (!(K > 0)) throw DomainError("K must be positive");
    SurvivalModel m;
    m.family_ = Family::prototype;
    m.alpha_ = alpha;
    m.delta_ = delta.value_or(default_delta(alpha));
    check_alpha_delta(alpha, m.delta_);
    m.K_ = K;
    m.Psi_ = std::pow(K, alpha);
    return m;
}

SurvivalModel SurvivalModel::tabulated(double alpha, double da, std::vector<double> beta, std::optional<double> delta) {
    if (!(da > 0)) throw DomainError("tabulated model: age step must be positive");
    if (beta.size() < 2) throw DomainError("tabulated model: need at least two beta samples");
    for (double b : beta)
        if (!(b >= 0) || !std::isfinite(b)) throw DomainError("tabulated model: beta must be finite and nonnegative");
    if (!(beta.back() > 0)) throw DomainError("tabulated model: last beta sample must be positive");
    SurvivalModel m;
    m.family_ = Family::tabulated;
    m.alpha_ = alpha;
    m.delta_ = delta.value_or(default_delta(alpha));
    check_alpha_delta(alpha, m.delta_);
    m.da_ = da;
    m.beta_ = std::move(beta);
    m.cum_.assign(m.beta_.size(), 0.0);
    for (std::size_t j = 1; j < m.beta_.size(); ++j) m.cum_[j] = m.cum_[j - 1] + 0.5 * da * (m.beta_[j - 1] + m.beta_[j]);
    m.a_end_ = da * static_cast<double>(m.beta_.size() - 1);
    m.K_tail_ = alpha / m.beta_.back() - m.a_end_;

    // least squares of t^alpha psi(t) = Psi + C t^-delta over the last decade of the table
    double lo = m.a_end_ / 10;
    std::size_t j0 = static_cast<std::size_t>(std::ceil(lo / da));
    if (j0 == 0 || m.beta_.size() - j0 < 10) throw DomainError("tabulated model: table too short to fit the tail (needs one decade)");
    double s11 = 0, s12 = 0, s22 = 0, r1 = 0, r2 = 0;
    for (std::size_t j = j0; j < m.beta_.size(); ++j) {
        double t = da * static_cast<double>(j);
        double y = std::pow(t, alpha) * std::exp(-m.cum_[j]);
        double x = std::pow(t, -m.delta_);
        s11 += 1;
        s12 += x;
        s22 += x * x;
        r1 += y;
        r2 += x * y;
    }
    double det = s11 * s22 - s12 * s12;
    m.Psi_ = (r1 * s22 - r2 * s12) / det;
    if (!(m.Psi_ > 0)) throw DomainError("tabulated model: fitted tail constant is not positive");
    return m;
}

SurvivalModel SurvivalModel::exponential(double beta0) {
    if (!(beta0 > 0)) throw DomainError("exponential model: rate must be positive");
    SurvivalModel m;
    m.family_ = Family::exponential;
    m.alpha_ = 1.0;
    m.delta_ = 0.0;
    m.beta0_ = beta0;
    m.Psi_ = 0;
    return m;
}

double SurvivalModel::tail_constant() const {
    if (family_ == Family::exponential) throw DomainError("exponential waiting times have no power tail");
    return Psi_;
}

double SurvivalModel::beta(double a) const {
    if (a < 0) throw DomainError("beta: negative age");
    switch (family_) {
        case Family::prototype: return alpha_ / (K_ + a);
        case Family::exponential: return beta0_;
        case Family::tabulated: break;
    }
    if (a >= a_end_) return alpha_ / (a + K_tail_);
    double x = a / da_;
    auto j = static_cast<std::size_t>(x);
    double f = x - static_cast<double>(j);
    return beta_[j] + f * (beta_[j + 1] - beta_[j]);
}

double SurvivalModel::beta_sup() const {
    switch (family_) {
        case Family::prototype: return alpha_ / K_;
        case Family::exponential: return beta0_;
        case Family::tabulated: break;
    }
    return *std::max_element(beta_.begin(), beta_.end());
}

double SurvivalModel::beta_integral_between(double t1, double t2) const {
    // tabulated only; exact for piecewise-linear beta
    double s = 0;
    double lo = t1;
    const double hi_tab = std::min(t2, a_end_);
    while (lo < hi_tab) {
        std::size_t j = std::min(static_cast<std::size_t>(lo / da_), beta_.size() - 2);
        double ce = da_ * static_cast<double>(j + 1);
        if (ce <= lo) ce = da_ * static_cast<double>(j + 2);
        double b = std::min(hi_tab, ce);
        s += 0.5 * (b - lo) * (beta(lo) + beta(b));
        lo = b;
    }
    if (t2 > a_end_) {
        double l = std::max(t1, a_end_);
        s += alpha_ * std::log1p((t2 - l) / (l + K_tail_));
    }
    return s;
}

double SurvivalModel::log_psi(double t) const {
    switch (family_) {
        case Family::prototype: return -alpha_ * std::log1p(t / K_);
        case Family::exponential: return -beta0_ * t;
        case Family::tabulated: break;
    }
    if (t >= a_end_) return -cum_.back() - alpha_ * std::log1p((t - a_end_) / (a_end_ + K_tail_));
    auto j = static_cast<std::size_t>(t / da_);
    double a = da_ * static_cast<double>(j);
    return -(cum_[j] + 0.5 * (t - a) * (beta_[j] + beta(t)));
}

double SurvivalModel::psi(double t) const {
    if (t < 0) throw DomainError("psi: negative time");
    return std::exp(log_psi(t));
}

double SurvivalModel::phi(double t) const {
    if (t < 0) throw DomainError("phi: negative time");
    return beta(t) * psi(t);
}

double SurvivalModel::survival_drop(double t1, double t2) const {
    if (t2 <= t1) return 0.0;
    switch (family_) {
        case Family::prototype:
            return psi(t2) * std::expm1(alpha_ * std::log1p((t2 - t1) / (K_ + t1)));
        case Family::exponential: return -psi(t1) * std::expm1(-beta0_ * (t2 - t1));
        case Family::tabulated: break;
    }
    return psi(t2) * std::expm1(beta_integral_between(t1, t2));
}

double SurvivalModel::psi_integral(double a, double b) const {
    if (b <= a) return 0.0;
    if (a < 0) throw DomainError("psi_integral: negative time");
    switch (family_) {
        case Family::prototype: return std::pow(K_, alpha_) * power_tail_integral(alpha_, K_, a, b);
        case Family::exponential: return -psi(a) * std::expm1(-beta0_ * (b - a)) / beta0_;
        case Family::tabulated: break;
    }
    double s = 0;
    double lo = a;
    while (lo < b && lo < a_end_) {
        double hi = std::min(b, da_ * (std::floor(lo / da_ + 1e-12) + 1));
        hi = std::min(hi, a_end_);
        if (hi <= lo) break;
        for (int q = 0; q < 8; ++q) s += gl8_w[q] * (hi - lo) * psi(lo + (hi - lo) * gl8_x[q]);
        lo = hi;
    }
    if (b > a_end_) {
        double l = std::max(a, a_end_);
        double c = psi(a_end_) * std::pow(a_end_ + K_tail_, alpha_);
        s += c * power_tail_integral(alpha_, K_tail_, l, b);
    }
    return s;
}

double SurvivalModel::invert_survival(double u) const { return invert_residual(0.0, u); }

double SurvivalModel::invert_residual(double a, double u) const {
    if (!(u > 0 && u <= 1)) throw DomainError("survival inversion needs u in (0,1]");
    if (u == 1) return 0.0;
    switch (family_) {
        case Family::prototype: return (K_ + a) * (std::pow(u, -1 / alpha_) - 1);
        case Family::exponential: return -std::log(u) / beta0_;
        case Family::tabulated: break;
    }
    // -log psi(a + t) = -log psi(a) - log u, solved exactly on the piecewise-quadratic log psi
    double target = -log_psi(a) - std::log(u);
    if (target >= cum_.back()) {
        double c = a_end_ + K_tail_;
        double t = c * std::exp((target - cum_.back()) / alpha_) - K_tail_;
        return std::max(t - a, 0.0);
    }
    auto it = std::upper_bound(cum_.begin(), cum_.end(), target);
    std::size_t j = static_cast<std::size_t>(it - cum_.begin()) - 1;
    double r = target - cum_[j];
    double b0 = beta_[j], sl = (beta_[j + 1] - beta_[j]) / da_;
    double s;
    if (std::abs(sl) < 1e-300) {
        s = b0 > 0 ? r / b0 : 0.0;
    } else {
        // b0 s + sl s^2/2 = r, stable root
        double disc = b0 * b0 + 2 * sl * r;
        s = 2 * r / (b0 + std::sqrt(std::max(disc, 0.0)));
    }
    double t = da_ * static_cast<double>(j) + s;
    return std::max(t - a, 0.0);
}

double psi_eval(const SurvivalModel& m, double t) { return m.psi(t); }
double phi_eval(const SurvivalModel& m, double t) { return m.phi(t); }
double tail_constant(const SurvivalModel& m) { return m.tail_constant(); }
double sample_waiting_time(const SurvivalModel& m, Philox& rng) { return m.invert_survival(rng.uniform()); }

JumpKernel JumpKernel::lattice_nn(int d) {
    if (d != 1 && d != 2) throw DomainError("kernel dimension must be 1 or 2");
    JumpKernel k;
    k.variant = Variant::lattice_nn;
    k.d = d;
    k.sigma2 = 1.0;
    for (int ax = 0; ax < d; ++ax)
        for (double s : {1.0, -1.0}) {
            std::array<double, 2> z{0, 0};
            z[ax] = s;
            k.offsets.push_back(z);
            k.probs.push_back(1.0 / (2 * d));
        }
    return k;
}

JumpKernel JumpKernel::gaussian(int d, double sigma2) {
    if (d != 1 && d != 2) throw DomainError("kernel dimension must be 1 or 2");
    if (!(sigma2 > 0)) throw DomainError("sigma2 must be positive");
    JumpKernel k;
    k.variant = Variant::gaussian;
    k.d = d;
    k.sigma2 = sigma2;
    return k;
}

JumpKernel JumpKernel::pmf(int d, std::vector<std::array<double, 2>> offsets, std::vector<double> probs,
                           std::optional<double> declared_sigma2) {
    if (d != 1 && d != 2) throw DomainError("kernel dimension must be 1 or 2");
    if (offsets.empty() || offsets.size() != probs.size()) throw DomainError("pmf kernel: offsets and probabilities must pair up");
    for (double p : probs)
        if (!(p >= 0)) throw DomainError("pmf kernel: probabilities must be nonnegative");
    JumpKernel k;
    k.variant = Variant::discrete_pmf;
    k.d = d;
    k.offsets = std::move(offsets);
    k.probs = std::move(probs);
    if (d == 1)
        for (auto& z : k.offsets) z[1] = 0;
    double s2 = 0;
    for (std::size_t i = 0; i < k.probs.size(); ++i)
        s2 += k.probs[i] * (k.offsets[i][0] * k.offsets[i][0] + k.offsets[i][1] * k.offsets[i][1]);
    k.sigma2 = declared_sigma2.value_or(s2);
    return k;
}

std::complex<double> kernel_char_fn(const JumpKernel& k, std::array<double, 2> w) {
    switch (k.variant) {
        case JumpKernel::Variant::lattice_nn:
            return k.d == 1 ? std::cos(w[0]) : 0.5 * (std::cos(w[0]) + std::cos(w[1]));
        case JumpKernel::Variant::gaussian:
            return std::exp(-k.sigma2 * (w[0] * w[0] + w[1] * w[1]) / (2.0 * k.d));
        case JumpKernel::Variant::discrete_pmf: break;
    }
    std::complex<double> s = 0;
    for (std::size_t i = 0; i < k.probs.size(); ++i)
        s += k.probs[i] * std::polar(1.0, -(w[0] * k.offsets[i][0] + w[1] * k.offsets[i][1]));
    return s;
}

std::array<double, 2> sample_jump(const JumpKernel& k, Philox& rng) {
    switch (k.variant) {
        case JumpKernel::Variant::lattice_nn: {
            auto i = static_cast<int>(rng.uniform() * 2 * k.d);
            std::array<double, 2> z{0, 0};
            z[i / 2] = (i % 2 == 0) ? 1.0 : -1.0;
            return z;
        }
        case JumpKernel::Variant::gaussian: {
            double s = std::sqrt(k.sigma2 / k.d);
            double x = s * rng.normal();
            double y = k.d == 2 ? s * rng.normal() : 0.0;
            return {x, y};
        }
        case JumpKernel::Variant::discrete_pmf: break;
    }
    double u = rng.uniform();
    double tot = 0;
    for (double p : k.probs) tot += p;
    u *= tot;
    double c = 0;
    for (std::size_t i = 0; i < k.probs.size(); ++i) {
        c += k.probs[i];
        if (u < c) return k.offsets[i];
    }
    return k.offsets.back();
}

ValidationReport validate_assumptions(const SurvivalModel& m, const JumpKernel& k) {
    ValidationReport r;
    auto fail = [&](std::string s) {
        r.pass = false;
        r.failures.push_back(std::move(s));
    };

    // kernel: zero mean, finite declared variance, normalized
    if (k.variant == JumpKernel::Variant::discrete_pmf) {
        double ps = 0, s2 = 0;
        std::array<double, 2> mean{0, 0};
        for (std::size_t i = 0; i < k.probs.size(); ++i) {
            ps += k.probs[i];
            mean[0] += k.probs[i] * k.offsets[i][0];
            mean[1] += k.probs[i] * k.offsets[i][1];
            s2 += k.probs[i] * (k.offsets[i][0] * k.offsets[i][0] + k.offsets[i][1] * k.offsets[i][1]);
        }
        r.prob_sum = ps;
        r.kernel_mean = mean;
        r.kernel_sigma2 = s2;
    } else {
        r.kernel_sigma2 = k.variant == JumpKernel::Variant::lattice_nn ? 1.0 : k.sigma2;
    }
    if (std::abs(r.prob_sum - 1) > 1e-12) {
        std::ostringstream os;
        os << "jump probabilities sum to " << r.prob_sum << ", not 1";
        fail(os.str());
    }
    double mnorm = std::hypot(r.kernel_mean[0], r.kernel_mean[1]);
    if (mnorm > 1e-12) {
        std::ostringstream os;
        os << "nonzero mean " << mnorm << " (jump kernel must be centered)";
        fail(os.str());
    }
    if (!(r.kernel_sigma2 > 0) || !std::isfinite(r.kernel_sigma2) ||
        std::abs(r.kernel_sigma2 - k.sigma2) > 1e-12 * std::max(1.0, k.sigma2)) {
        std::ostringstream os;
        os << "second moment " << r.kernel_sigma2 << " does not match declared sigma2 " << k.sigma2;
        fail(os.str());
    }

    // waiting times
    if (m.family() == SurvivalModel::Family::exponential) {
        fail("escape rate is not heavy tailed: alpha must lie in (0,1)");
        return r;
    }
    const double a = m.alpha(), dl = m.delta();
    if (!(a > 0 && a < 1)) fail("alpha must lie in (0,1)");
    if (!(dl > 0 && dl < 1 - a)) fail("delta must satisfy δ∈(0,1−α)");
    double prev = 1.0;
    for (double t : log_times(1e-3, 1e6)) {
        double p = m.psi(t);
        double b = m.beta(t);
        if (!std::isfinite(b) || b < 0 || b > m.beta_sup() * (1 + 1e-12)) fail("beta is not bounded on the sampled grid");
        if (p > prev * (1 + 1e-14)) fail("psi increases on the sampled grid");
        prev = p;
    }
    double Psi = m.tail_constant();
    // fit C on the first half of the log range, then require the band to hold on the second half;
    // for tables the range stops at the last sample (beyond it is extrapolation)
    double top = m.family() == SurvivalModel::Family::tabulated ? m.table_end() : 1e6;
    if (top <= 10) {
        fail("table too short to check the tail band");
        return r;
    }
    double split = std::sqrt(top);
    auto dev = [&](double t) { return std::abs(std::pow(t, a) * m.psi(t) - Psi) * std::pow(t, dl); };
    double C = 0;
    for (double t : log_times(1.0, split)) C = std::max(C, dev(t));
    double worst = 0;
    for (double t : log_times(split, top)) worst = std::max(worst, dev(t));
    r.tail_C = C;
    r.tail_ratio = C > 0 ? worst / C : (worst > 0 ? std::numeric_limits<double>::infinity() : 0.0);
    if (r.tail_ratio > 1 + 1e-9) {
        std::ostringstream os;
        os << "|t^alpha psi - Psi| t^delta keeps growing (ratio " << r.tail_ratio << "): delta too large for this tail";
        fail(os.str());
    }
    return r;
}

// ---- initial age profiles

void AgeProfile::build(std::vector<double> edges, std::function<double(double)> density) {
    edges_ = std::move(edges);
    density_ = std::move(density);
    nodes_.clear();
    panel_cum_.clear();
    double cum = 0;
    for (std::size_t p = 0; p + 1 < edges_.size(); ++p) {
        double a = edges_[p], h = edges_[p + 1] - edges_[p];
        for (int q = 0; q < 8; ++q) {
            double x = a + h * gl8_x[q];
            double w = h * gl8_w[q] * density_(x);
            cum += w;
            if (w != 0) nodes_.push_back({x, w});
        }
        panel_cum_.push_back(cum);
    }
}

double AgeProfile::sample(Philox& rng) const {
    const double total = mass();
    if (!(total > 0)) throw DomainError("cannot sample from an empty age profile");
    double u = rng.uniform() * total;
    if (u < dirac_ || panel_cum_.empty()) return 0.0;
    u -= dirac_;
    auto it = std::lower_bound(panel_cum_.begin(), panel_cum_.end(), u);
    std::size_t p = std::min<std::size_t>(static_cast<std::size_t>(it - panel_cum_.begin()), panel_cum_.size() - 1);
    double target = u - (p == 0 ? 0.0 : panel_cum_[p - 1]);
    // invert the within-panel cumulative mass by bisection
    double lo = edges_[p], hi = edges_[p + 1];
    auto partial = [&](double x) {
        double s = 0, h = x - edges_[p];
        for (int q = 0; q < 8; ++q) s += h * gl8_w[q] * density_(edges_[p] + h * gl8_x[q]);
        return s;
    };
    for (int i = 0; i < 60 && hi - lo > 1e-14 * std::max(1.0, hi); ++i) {
        double mid = 0.5 * (lo + hi);
        (partial(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

AgeProfile AgeProfile::dirac(double mass) {
    if (!(mass >= 0)) throw DomainError("age profile mass must be nonnegative");
    AgeProfile p;
    p.dirac_ = mass;
    return p;
}

AgeProfile AgeProfile::uniform(double width, double mass) {
    if (!(width > 0) || !(mass >= 0)) throw DomainError("uniform age profile needs width > 0 and mass >= 0");
    AgeProfile p;
    auto np = static_cast<std::size_t>(std::ceil(width / 0.25));
    std::vector<double> e;
    for (std::size_t i = 0; i <= np; ++i) e.push_back(width * static_cast<double>(i) / static_cast<double>(np));
    double dens = mass / width;
    p.build(std::move(e), [dens, width](double a) { return a >= 0 && a <= width ? dens : 0.0; });
    return p;
}

AgeProfile AgeProfile::exponential(double rate, double mass) {
    if (!(rate > 0) || !(mass >= 0)) throw DomainError("exponential age profile needs rate > 0 and mass >= 0");
    AgeProfile p;
    std::vector<double> e;
    // 80 panels of width 0.5/rate: truncation mass e^-40 relative
    for (int i = 0; i <= 80; ++i) e.push_back(0.5 * i / rate);
    p.build(std::move(e), [rate, mass](double a) { return mass * rate * std::exp(-rate * a); });
    return p;
}

AgeProfile AgeProfile::cells(double da, const std::vector<double>& density) {
    if (!(da > 0)) throw DomainError("age cells need da > 0");
    for (double x : density)
        if (!(x >= 0)) throw DomainError("negative initial age density");
    AgeProfile p;
    std::vector<double> e;
    for (std::size_t i = 0; i <= density.size(); ++i) e.push_back(da * static_cast<double>(i));
    auto dens = density;
    p.build(std::move(e), [dens, da](double a) {
        auto j = static_cast<std::size_t>(a / da);
        return j < dens.size() ? dens[j] : 0.0;
    });
    return p;
}

double AgeProfile::mass() const {
    double s = dirac_;
    for (auto& n : nodes_) s += n[1];
    return s;
}

double AgeProfile::weighted_mass(double alpha) const {
    double s = dirac_;
    for (auto& n : nodes_) s += n[1] * std::pow(1 + n[0], alpha);
    return s;
}

double AgeProfile::mass_between(double a0, double a1) const {
    double s = (a0 <= 0 && a1 > 0) ? dirac_ : 0.0;
    for (std::size_t p = 0; p + 1 < edges_.size(); ++p) {
        double lo = std::max(a0, edges_[p]), hi = std::min(a1, edges_[p + 1]);
        if (hi <= lo) continue;
        for (int q = 0; q < 8; ++q) s += (hi - lo) * gl8_w[q] * density_(lo + (hi - lo) * gl8_x[q]);
    }
    return s;
}

double AgeProfile::aged_mass(const SurvivalModel& m, double t) const {
    double s = dirac_ > 0 ? dirac_ * m.psi(t) : 0.0;
    for (auto& n : nodes_) s += n[1] * m.psi(n[0] + t) / m.psi(n[0]);
    return s;
}

double AgeProfile::aged_drop(const SurvivalModel& m, double t1, double t2) const {
    double s = dirac_ > 0 ? dirac_ * m.survival_drop(t1, t2) : 0.0;
    for (auto& n : nodes_) s += n[1] * m.survival_drop(n[0] + t1, n[0] + t2) / m.psi(n[0]);
    return s;
}

double AgeProfile::aged_rate(const SurvivalModel& m, double t) const {
    double s = dirac_ > 0 ? dirac_ * m.phi(t) : 0.0;
    for (auto& n : nodes_) s += n[1] * m.phi(n[0] + t) / m.psi(n[0]);
    return s;
}

InitialCondition InitialCondition::separable(AgeProfile age, GridMeasure rho) {
    for (double x : rho.v)
        if (!(x >= 0)) throw DomainError("initial density must be nonnegative");
    InitialCondition ic;
    ic.pieces.push_back({std::move(age), std::move(rho)});
    return ic;
}

InitialCondition InitialCondition::table(double da, const std::vector<GridMeasure>& density) {
    InitialCondition ic;
    for (std::size_t j = 0; j < density.size(); ++j) {
        for (double x : density[j].v)
            if (!(x >= 0)) throw DomainError("initial density must be nonnegative");
        if (density[j].mass() == 0) continue;
        std::vector<double> ind(j + 1, 0.0);
        ind[j] = 1.0;
        GridMeasure rho = density[j];
        for (double& x : rho.v) x *= da;
        ic.pieces.push_back({AgeProfile::cells(da, ind), std::move(rho)});
    }
    if (ic.pieces.empty()) throw DomainError("initial table is empty");
    return ic;
}

double InitialCondition::mass() const {
    double s = 0;
    for (auto& p : pieces) s += p.rho.mass();
    return s;
}

double InitialCondition::weighted_mass(double alpha) const {
    double s = 0;
    for (auto& p : pieces) {
        double n = p.age.mass();
        if (n > 0) s += p.rho.mass() * p.age.weighted_mass(alpha) / n;
    }
    return s;
}

}  // namespace subdiff
