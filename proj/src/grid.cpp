#include "otcp/grid.hpp"

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <stdexcept>

namespace otcp::grid {

int shell_count_for_level(int n_plus_1, int n_radii, int n_dirs, int n_origin,
                          double alpha) {
    const double need = static_cast<double>(n_plus_1) * (1.0 - alpha) -
                        static_cast<double>(n_origin);
    const int j = static_cast<int>(
        std::ceil(need / static_cast<double>(n_dirs) - 1e-9));
    return std::max(0, std::min(j, n_radii));
}

GridPlan plan_decomposition(int n_plus_1, int dim, std::optional<double> alpha_hint,
                            std::uint64_t direction_seed, int max_origin) {
    if (n_plus_1 < 2) throw std::invalid_argument("grid needs at least two points");
    if (dim < 1) throw std::invalid_argument("dimension must be positive");
    if (alpha_hint && (*alpha_hint <= 0.0 || *alpha_hint >= 1.0))
        throw std::invalid_argument("alpha hint must lie in (0, 1)");
    if (max_origin < 0) max_origin = n_plus_1;

    struct Candidate {
        int n_r, n_s, n_o;
    };
    auto better = [](const Candidate& a, const Candidate& b) {
        if (a.n_o != b.n_o) return a.n_o < b.n_o;
        const int da = std::abs(a.n_r - a.n_s), db = std::abs(b.n_r - b.n_s);
        if (da != db) return da < db;
        return a.n_r > b.n_r;
    };

    // strictness 2: bounded level set plus shell-mass cap; 1: bounded level
    // set only; 0: unconstrained.  Fall through when a tier is infeasible.
    auto pick = [&](int strictness) -> std::optional<Candidate> {
        std::optional<Candidate> best;
        for (int n_r = 1; n_r <= n_plus_1; ++n_r) {
            for (int n_s = 1; n_r * n_s <= n_plus_1; ++n_s) {
                if (dim == 1 && n_s % 2 != 0) continue;
                const int n_o = n_plus_1 - n_r * n_s;
                if (n_o > max_origin) continue;
                if (alpha_hint && strictness >= 1) {
                    const int j = shell_count_for_level(n_plus_1, n_r, n_s, n_o,
                                                        *alpha_hint);
                    if (j >= n_r) continue;
                }
                if (alpha_hint && strictness >= 2) {
                    if (static_cast<double>(n_r) * n_s >
                        (1.0 - *alpha_hint) * n_plus_1 + 1e-9)
                        continue;
                }
                Candidate cand{n_r, n_s, n_o};
                if (!best || better(cand, *best)) best = cand;
            }
        }
        return best;
    };

    std::optional<Candidate> chosen;
    for (int strictness = alpha_hint ? 2 : 0; strictness >= 0 && !chosen; --strictness)
        chosen = pick(strictness);
    if (!chosen) throw std::invalid_argument("no valid grid decomposition");

    GridPlan plan;
    plan.n_plus_1 = n_plus_1;
    plan.n_radii = chosen->n_r;
    plan.n_dirs = chosen->n_s;
    plan.n_origin = chosen->n_o;
    plan.direction_seed = direction_seed;
    return plan;
}

namespace {

std::vector<Vec> make_directions(int dim, int n_dirs, std::uint64_t seed) {
    std::vector<Vec> dirs;
    dirs.reserve(static_cast<std::size_t>(n_dirs));
    if (dim == 1) {
        if (n_dirs % 2 != 0)
            throw std::invalid_argument("1D grids need an even direction count");
        for (int s = 0; s < n_dirs; ++s)
            dirs.push_back({s % 2 == 0 ? 1.0 : -1.0});
    } else if (dim == 2) {
        for (int s = 0; s < n_dirs; ++s) {
            const double angle = 2.0 * std::numbers::pi * static_cast<double>(s) /
                                 static_cast<double>(n_dirs);
            dirs.push_back({std::cos(angle), std::sin(angle)});
        }
    } else {
        Rng rng(substream_seed(seed, "grid-directions"));
        while (static_cast<int>(dirs.size()) < n_dirs) {
            Vec g = rng.normal_vec(dim);
            const double len = norm(g);
            if (len < 1e-12) continue;
            for (auto& x : g) x /= len;
            dirs.push_back(std::move(g));
        }
    }
    return dirs;
}

}  // namespace

SphericalGrid build_grid(const GridPlan& plan, int dim) {
    if (plan.n_radii < 1 || plan.n_dirs < 1 || plan.n_origin < 0)
        throw std::invalid_argument("invalid grid plan");
    if (plan.n_origin + plan.n_radii * plan.n_dirs != plan.n_plus_1)
        throw std::invalid_argument("grid plan does not sum to n+1");

    SphericalGrid g;
    g.dim = dim;
    g.n_radii = plan.n_radii;
    g.n_dirs = plan.n_dirs;
    g.n_origin = plan.n_origin;
    g.direction_seed = plan.direction_seed;
    g.points.reserve(static_cast<std::size_t>(plan.n_plus_1));
    g.norms.reserve(static_cast<std::size_t>(plan.n_plus_1));

    for (int k = 0; k < plan.n_origin; ++k) {
        g.points.emplace_back(static_cast<std::size_t>(dim), 0.0);
        g.norms.push_back(0.0);
    }
    const auto dirs = make_directions(dim, plan.n_dirs, plan.direction_seed);
    for (int j = 1; j <= plan.n_radii; ++j) {
        const double r = static_cast<double>(j) / static_cast<double>(plan.n_radii);
        for (const auto& u : dirs) {
            Vec p(u);
            for (auto& x : p) x *= r;
            g.points.push_back(std::move(p));
            g.norms.push_back(r);
        }
    }
    return g;
}

SphericalGrid grid_from_points(std::vector<Vec> points, int n_origin, int n_dirs,
                               int n_radii) {
    if (points.empty()) throw std::invalid_argument("empty grid");
    const int total = n_origin + n_dirs * n_radii;
    if (total != static_cast<int>(points.size()))
        throw std::invalid_argument("declared shell structure does not match points");
    SphericalGrid g;
    g.dim = static_cast<int>(points.front().size());
    g.n_radii = n_radii;
    g.n_dirs = n_dirs;
    g.n_origin = n_origin;
    g.points = std::move(points);
    g.norms.reserve(g.points.size());
    for (int k = 0; k < total; ++k) {
        if (g.shell_of(k) == 0) {
            g.norms.push_back(0.0);
        } else {
            g.norms.push_back(static_cast<double>(g.shell_of(k)) /
                              static_cast<double>(n_radii));
        }
    }
    return g;
}

Vec sample_spherical_uniform(int dim, Rng& rng) {
    if (dim < 1) throw std::invalid_argument("dimension must be positive");
    const double radius = rng.uniform();
    if (dim == 1) return {rng.uniform() < 0.5 ? -radius : radius};
    Vec g;
    double len = 0.0;
    do {
        g = rng.normal_vec(dim);
        len = norm(g);
    } while (len < 1e-12);
    for (auto& x : g) x = x / len * radius;
    return g;
}

}  // namespace otcp::grid
