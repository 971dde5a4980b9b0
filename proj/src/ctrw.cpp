#include "subdiff/ctrw.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

namespace subdiff {

namespace {

struct ChunkSums {
    std::vector<double> d2, d4, dx, dx2;
    std::size_t jumps = 0;
    std::size_t outside = 0;
};

std::size_t lattice_bin(const SpaceLattice& lat, const std::array<double, 2>& x, bool& wrapped) {
    auto axis = [&](double c) {
        auto n = static_cast<long>(lat.n);
        long i = std::lround(c / lat.h);
        long w = ((i % n) + n) % n;
        // nodes are wrapped into (-L/2, L/2]
        if (i > n / 2 || i <= -n / 2) wrapped = true;
        return static_cast<std::size_t>(w);
    };
    if (lat.d == 1) return axis(x[0]);
    return axis(x[0]) * lat.n + axis(x[1]);
}

}  // namespace

CtrwResult simulate(const SurvivalModel& m, const JumpKernel& k, double eps, std::size_t n_particles, double T,
                    std::uint64_t seed, std::vector<double> snapshot_times, const CtrwOptions& opts) {
    if (n_particles < 1) throw DomainError("simulate: empty ensemble");
    if (!(eps > 0)) throw DomainError("eps must be positive");
    if (!(T > 0)) throw DomainError("horizon must be positive");
    if (snapshot_times.empty()) snapshot_times = log_times(1e-3 * T, T);
    std::sort(snapshot_times.begin(), snapshot_times.end());
    for (double t : snapshot_times)
        if (t < 0 || t > T * (1 + 1e-12)) throw DomainError("snapshot time outside [0, T]");
    if (opts.histogram && opts.histogram->d != k.d) throw MismatchError("histogram lattice dimension differs from kernel");
    if (opts.rho0 && opts.rho0->lattice.d != k.d) throw MismatchError("initial density dimension differs from kernel");

    const std::size_t S = snapshot_times.size();
    const std::size_t chunk = std::max<std::size_t>(opts.chunk, 1);
    const std::size_t n_chunks = (n_particles + chunk - 1) / chunk;
    double need = 0;
    if (opts.histogram) need += static_cast<double>(S * opts.histogram->nodes()) * 4.0 * (1 + worker_count());
    if (opts.keep_positions) need += static_cast<double>(S * n_particles) * 32.0;
    if (need > opts.memory_budget)
        throw SchemeError("simulate: snapshots x lattice exceed the memory budget (" + std::to_string(need) + " bytes)");

    const double alpha = m.family() == SurvivalModel::Family::exponential ? 1.0 : m.alpha();
    const double scale = std::pow(eps, 2 / alpha);

    // start positions: a discrete law over lattice nodes
    std::vector<double> start_cum;
    if (opts.rho0) {
        double c = 0;
        for (double v : opts.rho0->v) {
            if (v < 0) throw DomainError("initial density must be nonnegative");
            start_cum.push_back(c += v);
        }
        if (!(c > 0)) throw DomainError("initial density has no mass");
    }

    std::vector<std::uint32_t> hist;
    if (opts.histogram) hist.assign(S * opts.histogram->nodes(), 0);
    std::mutex hist_mutex;

    CtrwResult res;
    if (opts.keep_positions) {
        res.ensemble.resize(S);
        for (std::size_t s = 0; s < S; ++s) {
            res.ensemble[s].t = snapshot_times[s];
            res.ensemble[s].origin.resize(n_particles);
            res.ensemble[s].position.resize(n_particles);
        }
    }

    std::vector<ChunkSums> sums(n_chunks);
    parallel_for(n_chunks, [&](std::size_t c) {
        ChunkSums& cs = sums[c];
        cs.d2.assign(S, 0.0);
        cs.d4.assign(S, 0.0);
        cs.dx.assign(S, 0.0);
        cs.dx2.assign(S, 0.0);
        std::vector<std::uint32_t> local;
        if (opts.histogram) local.assign(S * opts.histogram->nodes(), 0);
        const std::size_t lo = c * chunk, hi = std::min(n_particles, lo + chunk);
        for (std::size_t p = lo; p < hi; ++p) {
            Philox rng = Philox::stream(seed, p);
            double a0 = opts.ages.sample(rng);
            std::array<double, 2> x0{0, 0};
            if (opts.rho0) {
                double u = rng.uniform() * start_cum.back();
                auto idx = static_cast<std::size_t>(std::upper_bound(start_cum.begin(), start_cum.end(), u) -
                                                    start_cum.begin());
                x0 = opts.rho0->lattice.position(std::min(idx, start_cum.size() - 1));
            }
            std::array<double, 2> x = x0;
            double t = scale * m.invert_residual(a0, rng.uniform());
            std::size_t s = 0;
            while (s < S) {
                while (s < S && snapshot_times[s] < t) {
                    double ddx = x[0] - x0[0], ddy = x[1] - x0[1];
                    double r2 = ddx * ddx + ddy * ddy;
                    cs.d2[s] += r2;
                    cs.d4[s] += r2 * r2;
                    cs.dx[s] += ddx;
                    cs.dx2[s] += ddx * ddx;
                    if (opts.histogram) {
                        bool wrapped = false;
                        std::size_t b = lattice_bin(*opts.histogram, x, wrapped);
                        if (wrapped) ++cs.outside;
                        ++local[s * opts.histogram->nodes() + b];
                    }
                    if (opts.keep_positions) {
                        res.ensemble[s].origin[p] = x0;
                        res.ensemble[s].position[p] = x;
                    }
                    ++s;
                }
                if (s == S) break;
                auto z = sample_jump(k, rng);
                x[0] += eps * z[0];
                x[1] += eps * z[1];
                ++cs.jumps;
                t += scale * m.invert_survival(rng.uniform());
            }
        }
        if (opts.histogram) {
            // integer counts: the merge order cannot change the result
            std::lock_guard lk(hist_mutex);
            for (std::size_t i = 0; i < hist.size(); ++i) hist[i] += local[i];
        }
    });

    const auto n = static_cast<double>(n_particles);
    std::vector<double> d2(S, 0.0), d4(S, 0.0), dx(S, 0.0), dx2(S, 0.0);
    for (const auto& cs : sums) {
        for (std::size_t s = 0; s < S; ++s) {
            d2[s] += cs.d2[s];
            d4[s] += cs.d4[s];
            dx[s] += cs.dx[s];
            dx2[s] += cs.dx2[s];
        }
        res.jumps += cs.jumps;
        res.outside += cs.outside;
    }
    for (std::size_t s = 0; s < S; ++s) {
        double mean = d2[s] / n;
        double var = n > 1 ? std::max(d4[s] / n - mean * mean, 0.0) * n / (n - 1) : 0.0;
        res.msd.t.push_back(snapshot_times[s]);
        res.msd.msd.push_back(mean);
        res.msd.stderr_.push_back(std::sqrt(var / n));
        res.msd.n.push_back(n);
        double mx = dx[s] / n;
        res.mean_x.push(snapshot_times[s], mx);
        res.sd_x.push(snapshot_times[s], std::sqrt(std::max(dx2[s] / n - mx * mx, 0.0)));
    }
    if (opts.histogram) {
        const SpaceLattice& lat = *opts.histogram;
        const double mass = opts.rho0 ? opts.rho0->mass() : 1.0;
        for (std::size_t s = 0; s < S; ++s) {
            GridMeasure g(lat);
            for (std::size_t i = 0; i < lat.nodes(); ++i)
                g.v[i] = static_cast<double>(hist[s * lat.nodes() + i]) * mass / (n * lat.cell());
            res.snapshots.push_back(std::move(g));
        }
    }
    return res;
}

MsdSeries msd_estimate(const std::vector<EnsembleSnapshot>& snaps, Origin origin) {
    MsdSeries out;
    for (const auto& s : snaps) {
        const std::size_t n = s.position.size();
        if (n < 2) throw DomainError("msd_estimate: needs at least 2 particles");
        if (s.origin.size() != n) throw MismatchError("msd_estimate: origins and positions differ in count");
        std::array<double, 2> c{0, 0};
        if (origin == Origin::ensemble_mean) {
            for (auto& x : s.position) {
                c[0] += x[0];
                c[1] += x[1];
            }
            c[0] /= static_cast<double>(n);
            c[1] /= static_cast<double>(n);
        }
        double s2 = 0, s4 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            std::array<double, 2> o = origin == Origin::initial ? s.origin[i] : c;
            double dx = s.position[i][0] - o[0], dy = s.position[i][1] - o[1];
            double r2 = dx * dx + dy * dy;
            s2 += r2;
            s4 += r2 * r2;
        }
        const auto nn = static_cast<double>(n);
        double mean = s2 / nn;
        double var = std::max(s4 / nn - mean * mean, 0.0) * nn / (nn - 1);
        out.t.push_back(s.t);
        out.msd.push_back(mean);
        out.stderr_.push_back(std::sqrt(var / nn));
        out.n.push_back(nn);
    }
    return out;
}

PowerFit fit_power_law(const MsdSeries& s, double lo, double hi, bool weighted) {
    std::vector<double> w;
    if (weighted) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (!(s.stderr_[i] > 0)) {
                w.clear();
                break;
            }
            double r = s.msd[i] / s.stderr_[i];
            w.push_back(r * r);
        }
    }
    return fit_power_law(s.as_series(), lo, hi, w);
}

}  // namespace subdiff
