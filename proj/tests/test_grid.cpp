#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "otcp/grid.hpp"
#include "otcp/rng.hpp"
#include "otcp/stats.hpp"

using otcp::Rng;
using otcp::Vec;
using otcp::grid::build_grid;
using otcp::grid::GridPlan;
using otcp::grid::grid_from_points;
using otcp::grid::plan_decomposition;
using otcp::grid::sample_spherical_uniform;
using otcp::grid::SphericalGrid;

namespace {

GridPlan manual_plan(int n_plus_1, int n_radii, int n_dirs, int n_origin,
                     std::uint64_t seed = 0) {
    GridPlan p;
    p.n_plus_1 = n_plus_1;
    p.n_radii = n_radii;
    p.n_dirs = n_dirs;
    p.n_origin = n_origin;
    p.direction_seed = seed;
    return p;
}

// Multiset comparison of point lists with a per-coordinate tolerance.
bool same_point_multiset(std::vector<Vec> a, std::vector<Vec> b, double tol) {
    if (a.size() != b.size()) return false;
    std::vector<bool> used(b.size(), false);
    for (const Vec& p : a) {
        bool found = false;
        for (std::size_t i = 0; i < b.size(); ++i) {
            if (used[i]) continue;
            bool match = p.size() == b[i].size();
            for (std::size_t c = 0; match && c < p.size(); ++c)
                match = std::abs(p[c] - b[i][c]) <= tol;
            if (match) {
                used[i] = true;
                found = true;
                break;
            }
        }
        if (!found) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("decomposition of 100 points in 2D at level 0.1") {
    GridPlan p = plan_decomposition(100, 2, 0.1);
    CHECK(p.n_radii == 10);
    CHECK(p.n_dirs == 9);
    CHECK(p.n_origin == 10);
    CHECK(p.n_plus_1 == 100);
}

TEST_CASE("decomposition of tiny 1D budgets") {
    GridPlan two = plan_decomposition(2, 1);
    CHECK(two.n_radii == 1);
    CHECK(two.n_dirs == 2);
    CHECK(two.n_origin == 0);

    GridPlan five = plan_decomposition(5, 1);
    CHECK(five.n_radii == 2);
    CHECK(five.n_dirs == 2);
    CHECK(five.n_origin == 1);
}

TEST_CASE("decomposition respects max_origin") {
    for (int n_plus_1 : {20, 21, 30, 99}) {
        GridPlan p = plan_decomposition(n_plus_1, 2, std::nullopt, 0, 1);
        CHECK(p.n_origin <= 1);
        CHECK(p.n_radii * p.n_dirs + p.n_origin == n_plus_1);
    }
    GridPlan hinted = plan_decomposition(21, 2, 0.2, 0, 1);
    CHECK(hinted.n_origin <= 1);
}

TEST_CASE("decomposition always factors exactly and keeps 1D direction counts even") {
    for (int n_plus_1 : {2, 3, 7, 13, 50, 101, 256}) {
        for (int dim : {1, 2, 3}) {
            GridPlan p = plan_decomposition(n_plus_1, dim);
            CHECK(p.n_radii * p.n_dirs + p.n_origin == n_plus_1);
            CHECK(p.n_radii >= 1);
            CHECK(p.n_dirs >= 1);
            if (dim == 1) CHECK(p.n_dirs % 2 == 0);
        }
    }
}

TEST_CASE("1D grid with one shell of two directions is {+1, -1}") {
    SphericalGrid g = build_grid(manual_plan(2, 1, 2, 0), 1);
    REQUIRE(g.points.size() == 2);
    CHECK(g.points[0] == Vec{1.0});
    CHECK(g.points[1] == Vec{-1.0});
    CHECK(g.norms[0] == doctest::Approx(1.0));
    CHECK(g.norms[1] == doctest::Approx(1.0));
}

TEST_CASE("2D grid with two shells of four directions and one origin") {
    SphericalGrid g = build_grid(manual_plan(9, 2, 4, 1), 2);
    REQUIRE(g.points.size() == 9);
    std::vector<Vec> expected{{0.0, 0.0}, {0.5, 0.0},  {0.0, 0.5},  {-0.5, 0.0},
                              {0.0, -0.5}, {1.0, 0.0}, {0.0, 1.0},  {-1.0, 0.0},
                              {0.0, -1.0}};
    CHECK(same_point_multiset(g.points, expected, 1e-12));
    // Layout: origin copies first, then shells by increasing radius.
    CHECK(g.points[0] == Vec{0.0, 0.0});
    CHECK(g.shell_of(0) == 0);
    CHECK(g.shell_of(1) == 1);
    CHECK(g.shell_of(5) == 2);
    CHECK(g.norms[1] == doctest::Approx(0.5));
    CHECK(g.norms[5] == doctest::Approx(1.0));
}

TEST_CASE("grid structural invariants across dimensions") {
    for (int dim : {1, 2, 3, 5}) {
        GridPlan p = dim == 1 ? manual_plan(21, 5, 4, 1)
                              : manual_plan(100, 10, 9, 10, 42);
        SphericalGrid g = build_grid(p, dim);
        REQUIRE(static_cast<int>(g.points.size()) == p.n_plus_1);

        int zeros = 0;
        for (const Vec& pt : g.points) {
            bool all_zero = true;
            for (double c : pt) all_zero = all_zero && c == 0.0;
            zeros += all_zero ? 1 : 0;
        }
        CHECK(zeros == p.n_origin);

        std::map<int, int> shell_counts;
        double max_norm = 0.0;
        for (int k = 0; k < g.total(); ++k) {
            int s = g.shell_of(k);
            shell_counts[s] += 1;
            double actual = otcp::norm(g.points[k]);
            max_norm = std::max(max_norm, actual);
            if (s == 0) {
                CHECK(actual == 0.0);
            } else {
                // Declared norm is the exact shell radius.
                CHECK(g.norms[k] == doctest::Approx(double(s) / p.n_radii).epsilon(1e-15));
                CHECK(actual == doctest::Approx(g.norms[k]).epsilon(1e-12));
            }
        }
        CHECK(max_norm == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(shell_counts[0] == p.n_origin);
        for (int s = 1; s <= p.n_radii; ++s) CHECK(shell_counts[s] == p.n_dirs);

        // Directions within a shell are unit vectors scaled by the radius.
        for (int k = p.n_origin; k < g.total(); ++k) {
            double r = g.norms[k];
            CHECK(otcp::norm(g.points[k]) / r == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("rebuilding a seeded grid is bit-for-bit deterministic") {
    GridPlan p = manual_plan(31, 3, 9, 4, 777);
    SphericalGrid a = build_grid(p, 3);
    SphericalGrid b = build_grid(p, 3);
    REQUIRE(a.points.size() == b.points.size());
    for (std::size_t k = 0; k < a.points.size(); ++k) CHECK(a.points[k] == b.points[k]);

    // A different seed moves the d>=3 directions.
    GridPlan q = manual_plan(31, 3, 9, 4, 778);
    SphericalGrid c = build_grid(q, 3);
    bool any_diff = false;
    for (std::size_t k = 0; k < a.points.size(); ++k)
        if (a.points[k] != c.points[k]) any_diff = true;
    CHECK(any_diff);
}

TEST_CASE("d=2 directions are equally spaced starting from angle zero") {
    SphericalGrid g = build_grid(manual_plan(6, 1, 6, 0), 2);
    for (int i = 0; i < 6; ++i) {
        double angle = 2.0 * 3.14159265358979323846 * i / 6.0;
        CHECK(g.points[i][0] == doctest::Approx(std::cos(angle)).epsilon(1e-12));
        CHECK(g.points[i][1] == doctest::Approx(std::sin(angle)).epsilon(1e-12));
    }
}

TEST_CASE("1D shells alternate +1, -1 and reject odd direction counts") {
    SphericalGrid g = build_grid(manual_plan(4, 2, 2, 0), 1);
    CHECK(g.points[0] == Vec{0.5});
    CHECK(g.points[1] == Vec{-0.5});
    CHECK(g.points[2] == Vec{1.0});
    CHECK(g.points[3] == Vec{-1.0});
    CHECK_THROWS_AS(build_grid(manual_plan(3, 1, 3, 0), 1), std::invalid_argument);
}

TEST_CASE("planner input validation") {
    CHECK_THROWS_AS(plan_decomposition(1, 2), std::invalid_argument);
    CHECK_THROWS_AS(plan_decomposition(10, 0), std::invalid_argument);
    CHECK_THROWS_AS(plan_decomposition(10, 2, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(plan_decomposition(10, 2, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(manual_plan(5, 0, 2, 1), 2), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(manual_plan(6, 2, 2, 1), 2), std::invalid_argument);
}

TEST_CASE("grid_from_points accepts a one-sided 1D layout") {
    std::vector<Vec> pts{{0.0}, {0.25}, {0.5}, {0.75}, {1.0}};
    SphericalGrid g = grid_from_points(pts, 1, 1, 4);
    CHECK(g.total() == 5);
    CHECK(g.shell_of(0) == 0);
    CHECK(g.shell_of(1) == 1);
    CHECK(g.shell_of(4) == 4);
    CHECK(g.norms[3] == doctest::Approx(0.75));
}

TEST_CASE("grid_from_points accepts the all-origin degenerate layout") {
    std::vector<Vec> pts(7, Vec{0.0, 0.0});
    SphericalGrid g = grid_from_points(pts, 7, 1, 0);
    CHECK(g.total() == 7);
    for (int k = 0; k < 7; ++k) CHECK(g.shell_of(k) == 0);
}

TEST_CASE("spherical-uniform sampler has Uniform(0,1) norms in 2D") {
    Rng rng(otcp::substream_seed(5, "grid-sampler-2d"));
    const int n = 100000;
    std::vector<double> norms;
    norms.reserve(n);
    for (int i = 0; i < n; ++i) {
        Vec u = sample_spherical_uniform(2, rng);
        REQUIRE(u.size() == 2);
        norms.push_back(otcp::norm(u));
    }
    double ks = otcp::stats::ks_statistic_uniform(norms);
    CHECK(ks < 0.01);
    CHECK(ks < otcp::stats::ks_critical(0.01, n));
}

TEST_CASE("spherical-uniform sampler is centred in 3D") {
    Rng rng(otcp::substream_seed(5, "grid-sampler-3d"));
    const int n = 100000;
    Vec mean(3, 0.0);
    std::vector<double> norms;
    norms.reserve(n);
    for (int i = 0; i < n; ++i) {
        Vec u = sample_spherical_uniform(3, rng);
        for (int c = 0; c < 3; ++c) mean[c] += u[c];
        norms.push_back(otcp::norm(u));
    }
    for (int c = 0; c < 3; ++c) CHECK(std::abs(mean[c] / n) < 0.02);
    CHECK(otcp::stats::ks_statistic_uniform(norms) < 0.01);
}

TEST_CASE("spherical-uniform sampler in 1D stays in [-1, 1] with uniform magnitude") {
    Rng rng(otcp::substream_seed(5, "grid-sampler-1d"));
    const int n = 50000;
    std::vector<double> mags;
    mags.reserve(n);
    int negatives = 0;
    for (int i = 0; i < n; ++i) {
        Vec u = sample_spherical_uniform(1, rng);
        REQUIRE(u.size() == 1);
        CHECK(std::abs(u[0]) <= 1.0);
        negatives += u[0] < 0.0 ? 1 : 0;
        mags.push_back(std::abs(u[0]));
    }
    CHECK(otcp::stats::ks_statistic_uniform(mags) < 0.012);
    CHECK(std::abs(negatives / double(n) - 0.5) < 0.01);
}
