#include "subdiff/core.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

namespace subdiff {

int worker_count() {
    int n = 0;
    if (const char* s = std::getenv("SUBDIFF_THREADS")) n = std::atoi(s);
    if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
    return std::max(n, 1);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, int threads) {
    if (threads <= 0) threads = worker_count();
    threads = static_cast<int>(std::min<std::size_t>(threads, n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    auto work = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lk(err_mu);
                if (!err) err = std::current_exception();
                next = n;
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int k = 0; k < threads; ++k) pool.emplace_back(work);
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

std::vector<double> log_times(double lo, double hi, int per_decade) {
    std::vector<double> out;
    int k0 = static_cast<int>(std::floor(std::log10(lo) * per_decade)) - 1;
    int k1 = static_cast<int>(std::ceil(std::log10(hi) * per_decade)) + 1;
    for (int k = k0; k <= k1; ++k) {
        double t = std::pow(10.0, static_cast<double>(k) / per_decade);
        if (t >= lo * (1 - 1e-12) && t <= hi * (1 + 1e-12)) out.push_back(t);
    }
    return out;
}

}  // namespace subdiff
