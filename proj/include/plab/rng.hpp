#pragma once

#include <cstdint>
#include <cmath>
#include <random>
#include <vector>

namespace plab {

// Deterministic random source. Distributions are hand-rolled on top of
// mt19937_64 so that streams are identical across standard libraries
// (std::normal_distribution is not pinned by the standard).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // uniform in [0, 1)
    double u01() { return (gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

    // Box-Muller; caches the second variate
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * u01() - 1.0;
            v = 2.0 * u01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        have_spare_ = true;
        return u * m;
    }

    std::vector<double> unit_vector(std::size_t dim) {
        std::vector<double> d(dim);
        double n2 = 0.0;
        do {
            n2 = 0.0;
            for (auto& x : d) {
                x = gaussian();
                n2 += x * x;
            }
        } while (n2 == 0.0);
        const double inv = 1.0 / std::sqrt(n2);
        for (auto& x : d) x *= inv;
        return d;
    }

    // uniform in the closed ball of the given radius
    std::vector<double> ball_point(std::size_t dim, double radius) {
        auto p = unit_vector(dim);
        const double r = radius * std::pow(u01(), 1.0 / static_cast<double>(dim));
        for (auto& x : p) x *= r;
        return p;
    }

    std::uint64_t raw() { return gen_(); }

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Stable mixing for derived seeds (seed, stream id, time index, ...).
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = a + 0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2);
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

} // namespace plab
