#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "otcp/common.hpp"
#include "otcp/rng.hpp"

namespace otcp::grid {

struct GridPlan {
    int n_plus_1 = 0;
    int n_radii = 0;   // shells at radii j/n_radii, j = 1..n_radii
    int n_dirs = 0;    // directions per shell
    int n_origin = 0;  // copies of the origin
    std::uint64_t direction_seed = 0;
};

// Smallest conformal shell count j such that the cumulative grid mass
// n_origin/(n+1) + j*n_dirs/(n+1) reaches 1 - alpha, clamped to [0, n_radii].
// A 1e-9 guard keeps exact integer boundaries from rounding up.
int shell_count_for_level(int n_plus_1, int n_radii, int n_dirs, int n_origin,
                          double alpha);

// Factor n+1 = n_radii*n_dirs + n_origin.  Candidates keep the level-alpha
// shell strictly inside the ball when a hint is given (j_alpha < n_radii,
// with the shell budget capped at (1-alpha)(n+1) so the origin retains an
// alpha-fraction); preference order is fewest origin copies, then the most
// balanced n_radii vs n_dirs, then radius-rich.  d=1 needs n_dirs even.
// max_origin = 1 yields duplicate-free point sets for semi-discrete sites.
GridPlan plan_decomposition(int n_plus_1, int dim,
                            std::optional<double> alpha_hint = std::nullopt,
                            std::uint64_t direction_seed = 0,
                            int max_origin = -1);

// Discrete reference measure: n_origin copies of 0, then shells of n_dirs
// points at radii j/n_radii, uniform weight 1/(n+1) each.  Point layout is
// origin copies first, then shells by increasing radius, direction order
// fixed (d=1 alternates +1,-1; d=2 equal angles from 0; d>=3 seeded).
struct SphericalGrid {
    int dim = 0;
    int n_radii = 0;
    int n_dirs = 0;
    int n_origin = 0;
    std::uint64_t direction_seed = 0;
    std::vector<Vec> points;
    std::vector<double> norms;  // exact shell radii, norms[k] = j/n_radii

    int total() const { return n_origin + n_dirs * n_radii; }
    bool is_origin(int k) const { return k < n_origin; }
    // Shell of point k: 0 for origin copies, else its radius index 1..n_radii.
    int shell_of(int k) const {
        return is_origin(k) ? 0 : (k - n_origin) / n_dirs + 1;
    }
};

SphericalGrid build_grid(const GridPlan& plan, int dim);

// Explicit target list with declared shell structure; permits the one-sided
// 1D layout and the all-origin degenerate case used by diagnostics.
SphericalGrid grid_from_points(std::vector<Vec> points, int n_origin, int n_dirs,
                               int n_radii);

// One draw from the continuous reference: uniform direction scaled by a
// Uniform(0,1) radius, so the norm itself is Uniform(0,1).
Vec sample_spherical_uniform(int dim, Rng& rng);

}  // namespace otcp::grid
