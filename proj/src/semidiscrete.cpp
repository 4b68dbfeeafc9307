#include "otcp/semidiscrete.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "otcp/errors.hpp"
#include "otcp/grid.hpp"

namespace otcp::semidiscrete {

namespace {

// Power distance with the shared moment kernel; ||u||^2 is common to all
// cells and dropped.
inline double cell_score(const Vec& u, const Vec& site, double site_sqnorm, double w) {
    return -2.0 * dot(u, site) + site_sqnorm + w;
}

std::vector<double> site_sqnorms(const std::vector<Vec>& sites) {
    std::vector<double> out;
    out.reserve(sites.size());
    for (const auto& s : sites) out.push_back(sqnorm(s));
    return out;
}

std::vector<Vec> draw_crn_sample(int dim, long count, std::uint64_t seed) {
    Rng rng(substream_seed(seed, "semidiscrete-crn"));
    std::vector<Vec> sample;
    sample.reserve(static_cast<std::size_t>(count));
    for (long i = 0; i < count; ++i)
        sample.push_back(grid::sample_spherical_uniform(dim, rng));
    return sample;
}

int argmin_cell(const Vec& u, const std::vector<Vec>& sites,
                const std::vector<double>& sqn, const std::vector<double>& w) {
    int best = 0;
    double best_score = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < sites.size(); ++k) {
        const double s = cell_score(u, sites[k], sqn[k], w[k]);
        if (s < best_score) {
            best_score = s;
            best = static_cast<int>(k);
        }
    }
    return best;
}

}  // namespace

int LaguerreDiagram::cell_of(const Vec& u) const {
    return argmin_cell(u, sites, site_sqnorms(sites), weights);
}

LaguerreDiagram LaguerreDiagram::from_point_cells(std::vector<Vec> sites) {
    LaguerreDiagram d;
    d.weights.assign(sites.size(), 0.0);
    d.mass_estimates.assign(sites.size(), 1.0 / static_cast<double>(sites.size()));
    d.sites = std::move(sites);
    d.degenerate_points = true;
    return d;
}

LaguerreDiagram fit_weights(std::vector<Vec> sites, long mc_samples, double mass_tol,
                            std::uint64_t seed, int max_iterations) {
    if (sites.empty()) throw std::invalid_argument("need at least one site");
    for (std::size_t a = 0; a < sites.size(); ++a)
        for (std::size_t b = a + 1; b < sites.size(); ++b)
            if (sites[a] == sites[b])
                throw std::invalid_argument("sites must be distinct");
    if (mc_samples < 10000)
        throw std::invalid_argument("need at least 10^4 Monte Carlo samples");
    if (mass_tol <= 0.0) throw std::invalid_argument("mass tolerance must be positive");

    if (sites.size() == 1) {
        LaguerreDiagram single;
        single.sites = std::move(sites);
        single.weights = {0.0};
        single.mass_estimates = {1.0};
        single.mc_sample_size = mc_samples;
        single.mc_seed = seed;
        single.mass_tol = mass_tol;
        return single;
    }

    const int dim = static_cast<int>(sites.front().size());
    const std::size_t m = sites.size();
    const double target = 1.0 / static_cast<double>(m);
    const auto sample = draw_crn_sample(dim, mc_samples, seed);
    const auto sqn = site_sqnorms(sites);

    // masses and empirical dual value at given weights
    auto evaluate = [&](const std::vector<double>& w, std::vector<double>& masses) {
        std::fill(masses.begin(), masses.end(), 0.0);
        double transport = 0.0;
        for (const auto& u : sample) {
            int best = 0;
            double best_score = std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < m; ++k) {
                const double s = cell_score(u, sites[k], sqn[k], w[k]);
                if (s < best_score) {
                    best_score = s;
                    best = static_cast<int>(k);
                }
            }
            masses[static_cast<std::size_t>(best)] += 1.0;
            transport += best_score + sqnorm(u);
        }
        for (auto& p : masses) p /= static_cast<double>(mc_samples);
        // Concave dual for min-plus cells: E[min_k(c + w_k)] - sum_k w_k/m.
        // Shift-invariant, and equal to the transport cost at the optimum.
        double value = transport / static_cast<double>(mc_samples);
        for (std::size_t k = 0; k < m; ++k) value -= w[k] * target;
        return value;
    };

    LaguerreDiagram diagram;
    diagram.mc_sample_size = mc_samples;
    diagram.mc_seed = seed;
    diagram.mass_tol = mass_tol;

    std::vector<double> w(m, 0.0), masses(m, 0.0), trial(m, 0.0),
        trial_masses(m, 0.0);
    double value = evaluate(w, masses);
    diagram.objective_trace.push_back(value);
    double step = 1.0 * static_cast<double>(m);

    auto deviation = [&](const std::vector<double>& p) {
        double d = 0.0;
        for (double x : p) d = std::max(d, std::fabs(x - target));
        return d;
    };

    int iter = 0;
    while (deviation(masses) > mass_tol) {
        if (++iter > max_iterations)
            throw ConvergenceError(
                "weight fit did not reach the mass tolerance within " +
                    std::to_string(max_iterations) + " iterations",
                deviation(masses));
        // Gradient of the dual above is mass_k - 1/m: an overstuffed cell
        // raises its weight and shrinks, a starving cell lowers it and grows.
        for (std::size_t k = 0; k < m; ++k)
            trial[k] = w[k] + step * (masses[k] - target);
        const double trial_value = evaluate(trial, trial_masses);
        // Common random numbers make the objective deterministic, so any real
        // decrease means the step overshot; the 3/sqrt(M) noise allowance is
        // only needed when comparing against fresh-sample evaluations.
        if (trial_value < value - 1e-12) {
            step *= 0.5;
            continue;
        }
        w.swap(trial);
        masses.swap(trial_masses);
        value = trial_value;
        diagram.objective_trace.push_back(value);
    }

    // Weights only matter up to a shared shift; pin the sum to zero.
    double mean = 0.0;
    for (double x : w) mean += x;
    mean /= static_cast<double>(m);
    for (auto& x : w) x -= mean;

    diagram.sites = std::move(sites);
    diagram.weights = std::move(w);
    diagram.mass_estimates = std::move(masses);
    diagram.achieved_mass_deviation = deviation(diagram.mass_estimates);
    return diagram;
}

CellMoments cell_moments(const LaguerreDiagram& diagram) {
    const std::size_t m = static_cast<std::size_t>(diagram.cell_count());
    CellMoments moments;
    if (diagram.degenerate_points) {
        moments.means = diagram.sites;
        moments.second_moments = site_sqnorms(diagram.sites);
        moments.max_norms.reserve(m);
        for (const auto& s : diagram.sites) moments.max_norms.push_back(norm(s));
        moments.counts.assign(m, 0);
        return moments;
    }

    const auto sample =
        draw_crn_sample(diagram.dim(), diagram.mc_sample_size, diagram.mc_seed);
    const auto sqn = site_sqnorms(diagram.sites);
    moments.means.assign(m, Vec(static_cast<std::size_t>(diagram.dim()), 0.0));
    moments.second_moments.assign(m, 0.0);
    moments.max_norms.assign(m, 0.0);
    moments.counts.assign(m, 0);
    for (const auto& u : sample) {
        const auto k = static_cast<std::size_t>(
            argmin_cell(u, diagram.sites, sqn, diagram.weights));
        ++moments.counts[k];
        for (std::size_t i = 0; i < u.size(); ++i) moments.means[k][i] += u[i];
        moments.second_moments[k] += sqnorm(u);
        moments.max_norms[k] = std::max(moments.max_norms[k], norm(u));
    }
    const long floor_count =
        diagram.mc_sample_size / (2 * static_cast<long>(m));
    for (std::size_t k = 0; k < m; ++k) {
        if (moments.counts[k] == 0)
            throw std::logic_error("empty cell in moment estimation");
        if (moments.counts[k] < floor_count) moments.low_count_warning = true;
        const double c = static_cast<double>(moments.counts[k]);
        for (auto& x : moments.means[k]) x /= c;
        moments.second_moments[k] /= c;
    }
    return moments;
}

double expected_cost(const Vec& z, int k, const CellMoments& moments) {
    if (k < 0 || k >= static_cast<int>(moments.means.size()))
        throw std::out_of_range("cell index");
    return moment_sq_dist(z, moments.means[static_cast<std::size_t>(k)],
                          moments.second_moments[static_cast<std::size_t>(k)]);
}

SdPartitionArtifact fit_sd_partition(std::vector<Vec> calib_scores,
                                     LaguerreDiagram diagram, CellMoments moments) {
    if (static_cast<int>(moments.means.size()) != diagram.cell_count())
        throw std::invalid_argument("moments do not match the diagram");
    SdPartitionArtifact artifact;
    artifact.core = partition::fit_stream(std::move(calib_scores), moments.means,
                                          moments.second_moments);
    artifact.diagram = std::move(diagram);
    artifact.moments = std::move(moments);
    return artifact;
}

std::vector<int> active_cells(const SdPartitionArtifact& artifact, double r) {
    std::vector<int> active;
    for (int k = 0; k < artifact.diagram.cell_count(); ++k)
        if (artifact.moments.max_norms[static_cast<std::size_t>(k)] <= r - 1e-3)
            active.push_back(k);
    return active;
}

partition::Boundedness check_bounded_sd(const SdPartitionArtifact& artifact, int k,
                                        int ray_samples, std::uint64_t seed) {
    if (k < 0 || k >= artifact.diagram.cell_count())
        throw std::out_of_range("cell index");
    // A cell certified strictly inside the unit ball cannot absorb a
    // recession direction: the boundary-touching cells' barycenters dominate
    // every outward direction.
    if (artifact.moments.max_norms[static_cast<std::size_t>(k)] <= 1.0 - 1e-3)
        return partition::Boundedness::ProvenBounded;
    // Boundary-touching cell: no geometric shortcut, fall back to recession
    // rays over the barycenter geometry.
    std::vector<double> force_ray_route(artifact.moments.means.size(), 1.0);
    return partition::check_bounded(artifact.core, k, force_ray_route, ray_samples, seed);
}

RandomizedTransport randomized_transport(const Vec& z, const SdPartitionArtifact& artifact,
                                         Rng& rng, long proposal_cap) {
    RandomizedTransport out;
    out.k_star = artifact.core.assign_index(z);
    if (artifact.diagram.degenerate_points) {
        out.point = artifact.diagram.sites[static_cast<std::size_t>(out.k_star)];
        out.norm = otcp::norm(out.point);
        return out;
    }
    const auto sqn = site_sqnorms(artifact.diagram.sites);
    for (long attempt = 0; attempt < proposal_cap; ++attempt) {
        Vec u = grid::sample_spherical_uniform(artifact.diagram.dim(), rng);
        if (argmin_cell(u, artifact.diagram.sites, sqn, artifact.diagram.weights) ==
            out.k_star) {
            out.norm = otcp::norm(u);
            out.point = std::move(u);
            return out;
        }
    }
    throw SamplingError("cell rejection sampler exhausted its proposal cap");
}

}  // namespace otcp::semidiscrete
