#pragma once

#include <cstdint>
#include <vector>

#include "otcp/common.hpp"
#include "otcp/partition.hpp"
#include "otcp/rng.hpp"

namespace otcp::semidiscrete {

// Power diagram of the spherical-uniform reference measure: cell k is
//   A_k(w) = { y : ||y - site_k||^2 + w_k <= ||y - site_j||^2 + w_j for all j },
// with weights tuned until every cell carries mass 1/(n+1).  Masses are
// Monte Carlo estimates over a fixed common-random-number sample, so reruns
// with one seed reproduce every byte.
struct LaguerreDiagram {
    std::vector<Vec> sites;
    std::vector<double> weights;         // sum normalized to zero
    std::vector<double> mass_estimates;  // CRN masses at the final weights
    long mc_sample_size = 0;
    std::uint64_t mc_seed = 0;
    double achieved_mass_deviation = 0.0;  // max_k |mass_k - 1/(n+1)|
    double mass_tol = 0.0;
    std::vector<double> objective_trace;  // accepted dual values, ascending
    bool degenerate_points = false;       // point cells: each site is its own cell

    int dim() const { return sites.empty() ? 0 : static_cast<int>(sites.front().size()); }
    int cell_count() const { return static_cast<int>(sites.size()); }

    // Smallest-index argmin of ||u - site_k||^2 + w_k.
    int cell_of(const Vec& u) const;

    // Point-cell diagram: transport collapses to the discrete stream.
    static LaguerreDiagram from_point_cells(std::vector<Vec> sites);
};

// Dual ascent on the semi-discrete objective
//   K(w) = E[ min_j (||Y - site_j||^2 + w_j) ] - sum_j w_j/(n+1),
// fixed sample of size mc_samples (common random numbers, so the objective is
// deterministic), gradient mass_j - 1/(n+1), step scaled by n+1 and halved on
// any real objective decrease.  Stops at max deviation <= mass_tol or throws
// ConvergenceError with the deviation achieved at the iteration cap.
// A single site is a trivial diagram: one cell of mass 1, weight 0.
LaguerreDiagram fit_weights(std::vector<Vec> sites, long mc_samples = 200000,
                            double mass_tol = 5e-3, std::uint64_t seed = 0,
                            int max_iterations = 2000);

struct CellMoments {
    std::vector<Vec> means;             // m_k = E[U | U in A_k]
    std::vector<double> second_moments;  // s_k = E[||U||^2 | U in A_k]
    std::vector<double> max_norms;       // max sample norm per cell (certificates)
    std::vector<long> counts;
    bool low_count_warning = false;  // some cell saw fewer than M/(2(n+1)) samples
};

// Conditional moments of the reference measure per cell, estimated on the
// diagram's own common-random-number sample.
CellMoments cell_moments(const LaguerreDiagram& diagram);

// Expected transport cost to cell k: E||z - U||^2 over U ~ reference | A_k,
// which is ||z||^2 - 2<z, m_k> + s_k.
double expected_cost(const Vec& z, int k, const CellMoments& moments);

// Assignment stream with expected costs: targets are cell barycenters,
// squared norms are cell second moments.  Same polyhedral structure as the
// discrete stream; point cells reproduce it exactly.
struct SdPartitionArtifact {
    LaguerreDiagram diagram;
    CellMoments moments;
    partition::StreamCore core;
};

SdPartitionArtifact fit_sd_partition(std::vector<Vec> calib_scores,
                                     LaguerreDiagram diagram, CellMoments moments);

// Active cells for a quantile radius: cells certified inside the ball of
// radius r by their sample max norm (margin 1e-3).
std::vector<int> active_cells(const SdPartitionArtifact& artifact, double r);

partition::Boundedness check_bounded_sd(const SdPartitionArtifact& artifact, int k,
                                        int ray_samples = 4096,
                                        std::uint64_t seed = 0);

struct RandomizedTransport {
    int k_star = -1;
    Vec point;    // draw from the reference conditioned on cell k_star
    double norm = 0.0;
};

// Rejection sampler: propose from the reference, accept inside the assigned
// cell.  Expected n+1 proposals; a cap of 10^6 throws SamplingError.
RandomizedTransport randomized_transport(const Vec& z, const SdPartitionArtifact& artifact,
                                         Rng& rng, long proposal_cap = 1000000);

}  // namespace otcp::semidiscrete
