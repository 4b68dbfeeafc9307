#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "otcp/common.hpp"
#include "otcp/grid.hpp"
#include "otcp/partition.hpp"
#include "otcp/rng.hpp"

namespace otcp::conformal {

struct RadiusSelection {
    int j_alpha = 0;          // number of shells inside the region
    double radius = 0.0;      // j_alpha / n_radii
    double nominal_mass = 0.0;
    bool outermost = false;   // radius == 1: boundedness no longer guaranteed
};

// Smallest shell radius whose cumulative grid mass reaches 1 - alpha.
RadiusSelection conformal_radius(const grid::SphericalGrid& grid, double alpha);

// Union of partition cells whose targets lie within the ball of the given
// radius.  Membership of a query score is by assigned-target norm.
struct QuantileRegion {
    double radius = 0.0;
    std::vector<int> active_indices;  // duplicates kept; mass counts multiplicity
    double nominal_mass = 0.0;
};

QuantileRegion quantile_region(const partition::PartitionArtifact& artifact, double r);

bool region_contains_score(const partition::PartitionArtifact& artifact, double r,
                           const Vec& score);

// Prediction set for the residual score: y belongs iff y - prediction does.
struct PredictionSet {
    Vec prediction;
    double radius = 0.0;
    double nominal_mass = 0.0;
};

PredictionSet predict_set(const partition::PartitionArtifact& artifact, double r,
                          Vec prediction);

bool prediction_set_contains(const partition::PartitionArtifact& artifact,
                             const PredictionSet& set, const Vec& y);

// Built-in data generators for simulation and diagnostics.
enum class Scenario { Gaussian2d, Banana2d, Uniform1d };

Scenario scenario_from_name(const std::string& name);
const char* scenario_name(Scenario s);
int scenario_dim(Scenario s);
Vec draw_scenario_score(Scenario s, Rng& rng);

struct SimulationConfig {
    Scenario scenario = Scenario::Gaussian2d;
    int n = 99;            // calibration points per replication
    double alpha = 0.1;
    long replications = 1000;
    std::uint64_t seed = 0;
    std::optional<grid::GridPlan> plan;  // default: plan_decomposition with alpha hint
    int threads = 0;                     // 0: hardware choice
};

struct CoverageReport {
    long trials = 0;
    long hits = 0;
    double empirical_coverage = 0.0;
    double nominal = 0.0;
    double binomial_95_halfwidth = 0.0;
    grid::GridPlan plan;
    RadiusSelection radius;
};

// Fresh calibration set and test point per replication; marginal coverage.
CoverageReport simulate_coverage(const SimulationConfig& config);

struct PitHistogram {
    std::vector<double> radii;          // shell radii, 0 first
    std::vector<long> counts;           // assigned-norm counts per shell
    std::vector<double> expected_mass;  // grid mass per shell
    std::vector<double> observed_freq;
    long total = 0;
    double chi_square = 0.0;
    int dof = 0;
    double p_value = 1.0;
};

// Distribution of the assigned-target norm of a held-out point; exact
// discrete uniformity over shells is the calibration identity under test.
// The 1D uniform scenario uses the one-sided grid {0, 1/n, ..., 1} so each
// of the n+1 shells carries mass 1/(n+1).
PitHistogram pit_histogram(const SimulationConfig& config);

}  // namespace otcp::conformal
