#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace subdiff {

// Philox4x64-10 (Salmon et al. 2011). Same block function as numpy.random.Philox:
// the counter is bumped before each block is generated.
class Philox {
public:
    using Block = std::array<std::uint64_t, 4>;

    Philox(std::uint64_t k0, std::uint64_t k1, Block counter = {0, 0, 0, 0}) : key_{k0, k1}, ctr_(counter) {}

    // stream `id` of run `seed`
    static Philox stream(std::uint64_t seed, std::uint64_t id) { return Philox(seed, id); }

    std::uint64_t next_u64() {
        if (pos_ == 4) {
            bump();
            buf_ = block(ctr_, key_);
            pos_ = 0;
        }
        return buf_[pos_++];
    }

    // uniform on the open interval (0,1)
    double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform(), u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double th = 6.283185307179586 * u2;
        spare_ = r * std::sin(th);
        have_spare_ = true;
        return r * std::cos(th);
    }

    static Block block(Block c, std::array<std::uint64_t, 2> k) {
        for (int r = 0; r < 10; ++r) {
            if (r > 0) {
                k[0] += 0x9E3779B97F4A7C15ULL;
                k[1] += 0xBB67AE8584CAA73BULL;
            }
            unsigned __int128 p0 = static_cast<unsigned __int128>(0xD2E7470EE14C6C93ULL) * c[0];
            unsigned __int128 p1 = static_cast<unsigned __int128>(0xCA5A826395121157ULL) * c[2];
            std::uint64_t hi0 = static_cast<std::uint64_t>(p0 >> 64), lo0 = static_cast<std::uint64_t>(p0);
            std::uint64_t hi1 = static_cast<std::uint64_t>(p1 >> 64), lo1 = static_cast<std::uint64_t>(p1);
            c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        }
        return c;
    }

private:
    void bump() {
        for (auto& w : ctr_)
            if (++w != 0) break;
    }

    std::array<std::uint64_t, 2> key_;
    Block ctr_;
    Block buf_{};
    int pos_ = 4;
    bool have_spare_ = false;
    double spare_ = 0;
};

}  // namespace subdiff
