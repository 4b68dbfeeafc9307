#pragma once

#include <cstdint>
#include <vector>

#include "otcp/common.hpp"
#include "otcp/grid.hpp"

namespace otcp::partition {

enum class Boundedness { ProvenBounded, ProvenUnbounded, Unknown };

// Shared core of the discrete and semi-discrete assignment streams.  A query
// Z is routed to the target minimizing
//   f_k(Z) = ||Z||^2 - 2<Z, target_k> + target_sqnorm_k + leave_out_cost_k,
// where leave_out_cost_k is the optimal assignment cost of the calibration
// scores to the other n targets.  For the discrete stream target_sqnorm_k is
// ||U_k||^2 and f_k(Z) = ||Z - U_k||^2 + C_k; the semi-discrete stream swaps
// in cell barycenters and second moments.
struct StreamCore {
    int dim = 0;
    std::vector<Vec> targets;
    std::vector<double> target_sqnorm;
    std::vector<double> leave_out_costs;
    std::vector<std::vector<int>> sub_assignments;  // per left-out target
    std::vector<Vec> calib_scores;

    int total() const { return static_cast<int>(targets.size()); }

    double stream_cost(const Vec& z, int k) const {
        return sqnorm(z) - 2.0 * dot(z, targets[static_cast<std::size_t>(k)]) +
               target_sqnorm[static_cast<std::size_t>(k)] +
               leave_out_costs[static_cast<std::size_t>(k)];
    }

    // Half-space offset between regions j and k:
    //   f_j(Z) - f_k(Z) = 2 (<Z, t_k - t_j> - beta(j, k)).
    double beta(int j, int k) const {
        return 0.5 * (target_sqnorm[static_cast<std::size_t>(k)] -
                      target_sqnorm[static_cast<std::size_t>(j)] +
                      leave_out_costs[static_cast<std::size_t>(k)] -
                      leave_out_costs[static_cast<std::size_t>(j)]);
    }

    // Smallest-index argmin of the stream cost.
    int assign_index(const Vec& z) const;
};

// leave_out_costs plus one optimal sub-assignment per left-out target.
StreamCore fit_stream(std::vector<Vec> calib_scores, std::vector<Vec> targets,
                      std::vector<double> target_sqnorm);

struct PartitionArtifact {
    grid::SphericalGrid grid;
    StreamCore core;
};

// Calibration scores against the grid's points; n+1 = grid size, n = scores.
PartitionArtifact fit(std::vector<Vec> calib_scores, grid::SphericalGrid grid);

struct AssignResult {
    int k_star = -1;
    double f_value = 0.0;  // stream cost at k_star
    Vec target;            // grid point the query is matched to
    // Full augmented permutation: calib row i -> sub_assignment[i], query -> k_star.
    const std::vector<int>* sub_assignment = nullptr;
};

AssignResult assign(const PartitionArtifact& artifact, const Vec& z);

// One cell of the induced polyhedral partition:
//   R_j = { Z : <Z, t_k - t_j> <= beta(j,k) for all k != j }.
// Rows whose target coincides with t_j (origin copies) are dropped and the
// duplicate indices recorded instead.
struct Region {
    int index = -1;
    std::vector<int> duplicate_indices;   // targets identical to this one
    std::vector<int> comparison_indices;  // k for each constraint row
    std::vector<Vec> normals;             // t_k - t_j
    std::vector<double> offsets;          // beta(j, k)
    Boundedness bounded = Boundedness::Unknown;

    // max_k <z, normal_k> - offset_k; membership is margin <= tol.
    double membership_margin(const Vec& z) const;
    bool contains(const Vec& z, double tol = 1e-9) const {
        return membership_margin(z) <= tol;
    }
};

Region region(const StreamCore& core, int j);

// Geometric shortcut first: a target strictly inside the unit ball has a
// bounded region.  Otherwise try the target's own direction plus seeded rays
// as recession directions; one hit proves unboundedness, exhaustion stays
// unknown.
Boundedness check_bounded(const StreamCore& core, int j,
                          const std::vector<double>& target_norms,
                          int ray_samples = 4096, std::uint64_t seed = 0);

}  // namespace otcp::partition
