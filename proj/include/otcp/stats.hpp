#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace otcp::stats {

// Two-sided KS statistic of a sample against Uniform(0,1).
inline double ks_statistic_uniform(std::vector<double> sample) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        double hi = (static_cast<double>(i) + 1.0) / n - sample[i];
        double lo = sample[i] - static_cast<double>(i) / n;
        d = std::max(d, std::max(hi, lo));
    }
    return d;
}

// Asymptotic KS critical values c(level)/sqrt(n).
inline double ks_critical(double level, std::size_t n) {
    double c = level <= 0.01 ? 1.628 : (level <= 0.05 ? 1.358 : 1.224);
    return c / std::sqrt(static_cast<double>(n));
}

// Regularized upper incomplete gamma Q(a, x), series + continued fraction.
inline double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) return 1.0;
    if (x == 0.0) return 1.0;
    const double gln = std::lgamma(a);
    if (x < a + 1.0) {
        // series for P(a,x), return 1 - P
        double ap = a;
        double sum = 1.0 / a;
        double del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
        }
        double p = sum * std::exp(-x + a * std::log(x) - gln);
        return 1.0 - p;
    }
    // Lentz continued fraction for Q directly
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x) - gln) * h;
}

struct ChiSquare {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
};

// Goodness of fit for observed counts against expected counts; bins with
// zero expectation must carry zero observations and are dropped.
inline ChiSquare chi_square_gof(const std::vector<double>& observed,
                                const std::vector<double>& expected) {
    ChiSquare out;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        if (expected[i] <= 0.0) continue;
        double d = observed[i] - expected[i];
        out.statistic += d * d / expected[i];
        ++out.dof;
    }
    out.dof -= 1;
    if (out.dof >= 1)
        out.p_value = gamma_q(0.5 * static_cast<double>(out.dof), 0.5 * out.statistic);
    return out;
}

inline double binomial_halfwidth(double p, long trials) {
    return 1.96 * std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

}  // namespace otcp::stats
