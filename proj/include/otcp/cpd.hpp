#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "otcp/common.hpp"
#include "otcp/partition.hpp"
#include "otcp/rng.hpp"
#include "otcp/scores.hpp"
#include "otcp/semidiscrete.hpp"

namespace otcp::cpd {

// Multivariate conformal predictive distribution evaluated at one candidate:
// the candidate's score is pushed through the fitted assignment stream and
// reported as a vector rank in the unit ball.  The conservative variant is
// deterministic; the randomized variant draws the rank from the assigned
// cell and has an exactly Uniform(0,1) norm under exchangeability.
struct CpdEvaluation {
    Vec candidate;
    Vec score;
    scores::ScoreKind score_kind = scores::ScoreKind::Residual;
    bool monotonicity_guaranteed = false;  // residual scores only
    int k_star = -1;
    Vec vector_rank;       // assigned target (discrete) or cell barycenter
    double norm_rank = 0.0;
    std::optional<Vec> randomized_point;
    std::optional<double> randomized_norm;
};

CpdEvaluation cpd_evaluate(const Vec& y, const Vec& prediction,
                           const partition::PartitionArtifact& artifact);

// Raw score path for non-residual scores; monotonicity in y is not implied.
CpdEvaluation cpd_evaluate_score(const scores::ScoreVector& score,
                                 const partition::PartitionArtifact& artifact);

CpdEvaluation cpd_evaluate_randomized(const Vec& y, const Vec& prediction,
                                      const semidiscrete::SdPartitionArtifact& artifact,
                                      Rng& rng);

CpdEvaluation cpd_evaluate_score_randomized(const scores::ScoreVector& score,
                                            const semidiscrete::SdPartitionArtifact& artifact,
                                            Rng& rng);

// One-dimensional predictive interval of the augmented empirical law: with
// the candidate appended to the sample, Q spans rank/(n+1) over the
// candidate's tie block.  tau interpolates across the block.
struct DempsterHillInterval {
    double lower = 0.0;
    double upper = 0.0;
    std::optional<double> randomized_value;  // lower + tau * (upper - lower)
};

DempsterHillInterval dempster_hill(double y, const std::vector<double>& sample,
                                   std::optional<double> tau = std::nullopt);

enum class DhGenerator { Normal, Coin };

struct DhPitReport {
    long replications = 0;
    double ks_statistic = 0.0;
    double ks_critical_5pct = 0.0;
    bool pass = false;
};

// Randomized PIT of the held-out point across replications; exact
// Uniform(0,1) for continuous and discrete generators alike.  With
// randomize_tau = false (tau pinned to 0) the discrete generator is the
// designed negative control and must fail.
DhPitReport dh_pit_suite(DhGenerator generator, int n, long replications,
                         std::uint64_t seed, bool randomize_tau = true);

}  // namespace otcp::cpd
