#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace subdiff {

// bad argument values (alpha out of range, negative times, ...)
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// inputs that are individually fine but do not fit together
struct MismatchError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// numerical scheme refused to deliver (instability, budget, ...)
struct SchemeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// (t, value) pairs; t strictly increasing
struct Series {
    std::vector<double> t;
    std::vector<double> v;

    std::size_t size() const { return t.size(); }
    bool empty() const { return t.empty(); }
    void push(double tt, double vv) {
        t.push_back(tt);
        v.push_back(vv);
    }
};

// SUBDIFF_THREADS, 0 or unset means hardware concurrency
int worker_count();

// runs body(i) for i in [0, n); each index touched by exactly one thread.
// callers write into per-index slots, so the result never depends on scheduling
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, int threads = 0);

// 10^(k/8) for k such that lo <= t <= hi (inclusive, with a small slack)
std::vector<double> log_times(double lo, double hi, int per_decade = 8);

}  // namespace subdiff
