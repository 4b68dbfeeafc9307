#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace otcp {

using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double sqnorm(const Vec& a) { return dot(a, a); }

inline double norm(const Vec& a) { return std::sqrt(sqnorm(a)); }

inline Vec sub(const Vec& a, const Vec& b) {
    Vec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

inline Vec add(const Vec& a, const Vec& b) {
    Vec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

inline double sq_dist(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

// Squared distance in moment form: ||z||^2 - 2<z,m> + s.  With m the point
// itself and s = ||m||^2 this is an ordinary squared distance; keeping one
// expression for both uses makes the point-cell reduction exact in floats.
inline double moment_sq_dist(const Vec& z, const Vec& m, double s) {
    return sqnorm(z) - 2.0 * dot(z, m) + s;
}

inline bool all_finite(const Vec& a) {
    for (double x : a)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace otcp
