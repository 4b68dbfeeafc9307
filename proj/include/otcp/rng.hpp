#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "otcp/common.hpp"

namespace otcp {

// One master seed fans out into named/indexed sub-streams so that adding a
// consumer never shifts the draws of another.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t substream_seed(std::uint64_t master, std::string_view name) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the stream name
    for (char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return mix64(master ^ h);
}

inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index) {
    return mix64(master + 0x632be59bd9b4e019ULL * (index + 1));
}

// mt19937_64 with explicit double conversion; avoids the
// implementation-defined std distributions so a seed pins every byte.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t bits() { return eng_(); }

    // Uniform on [0, 1).
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Marsaglia polar method, no trig, one cached spare.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    Vec normal_vec(int dim) {
        Vec out(static_cast<std::size_t>(dim));
        for (auto& x : out) x = normal();
        return out;
    }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace otcp
