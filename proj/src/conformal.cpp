#include "otcp/conformal.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <future>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "otcp/errors.hpp"
#include "otcp/stats.hpp"

namespace otcp::conformal {

RadiusSelection conformal_radius(const grid::SphericalGrid& g, double alpha) {
    if (alpha <= 0.0 || alpha >= 1.0)
        throw std::invalid_argument("alpha must lie in (0, 1)");
    if (g.n_radii < 1) throw std::invalid_argument("grid has no shells");
    const int n_plus_1 = g.total();
    const double need = static_cast<double>(n_plus_1) * (1.0 - alpha) -
                        static_cast<double>(g.n_origin);
    const int j_raw = static_cast<int>(
        std::ceil(need / static_cast<double>(g.n_dirs) - 1e-9));
    if (j_raw > g.n_radii) {
        // Unreachable for alpha in (0,1) with exact arithmetic; keep the
        // guard for malformed grids.
        const double min_alpha =
            1.0 - static_cast<double>(g.n_origin + g.n_radii * g.n_dirs) /
                      static_cast<double>(n_plus_1);
        throw ConfigError("alpha too small for this grid; minimum achievable alpha is " +
                          std::to_string(min_alpha));
    }
    RadiusSelection sel;
    sel.j_alpha = std::max(0, j_raw);
    sel.radius = static_cast<double>(sel.j_alpha) / static_cast<double>(g.n_radii);
    sel.nominal_mass =
        (static_cast<double>(g.n_origin) +
         static_cast<double>(sel.j_alpha) * static_cast<double>(g.n_dirs)) /
        static_cast<double>(n_plus_1);
    sel.outermost = sel.j_alpha == g.n_radii;
    return sel;
}

QuantileRegion quantile_region(const partition::PartitionArtifact& artifact, double r) {
    if (r < 0.0 || r > 1.0) throw std::invalid_argument("radius must lie in [0, 1]");
    QuantileRegion q;
    q.radius = r;
    const auto& norms = artifact.grid.norms;
    for (int k = 0; k < artifact.grid.total(); ++k)
        if (norms[static_cast<std::size_t>(k)] <= r + 1e-12)
            q.active_indices.push_back(k);
    q.nominal_mass = static_cast<double>(q.active_indices.size()) /
                     static_cast<double>(artifact.grid.total());
    return q;
}

bool region_contains_score(const partition::PartitionArtifact& artifact, double r,
                           const Vec& score) {
    const int k = artifact.core.assign_index(score);
    return artifact.grid.norms[static_cast<std::size_t>(k)] <= r + 1e-12;
}

PredictionSet predict_set(const partition::PartitionArtifact& artifact, double r,
                          Vec prediction) {
    if (static_cast<int>(prediction.size()) != artifact.core.dim)
        throw std::invalid_argument("prediction dimension mismatch");
    PredictionSet set;
    set.radius = r;
    set.nominal_mass = quantile_region(artifact, r).nominal_mass;
    set.prediction = std::move(prediction);
    return set;
}

bool prediction_set_contains(const partition::PartitionArtifact& artifact,
                             const PredictionSet& set, const Vec& y) {
    return region_contains_score(artifact, set.radius, sub(y, set.prediction));
}

Scenario scenario_from_name(const std::string& name) {
    if (name == "gaussian") return Scenario::Gaussian2d;
    if (name == "banana") return Scenario::Banana2d;
    if (name == "uniform1d") return Scenario::Uniform1d;
    throw ConfigError("unknown scenario: " + name);
}

const char* scenario_name(Scenario s) {
    switch (s) {
        case Scenario::Gaussian2d: return "gaussian";
        case Scenario::Banana2d: return "banana";
        case Scenario::Uniform1d: return "uniform1d";
    }
    return "?";
}

int scenario_dim(Scenario s) { return s == Scenario::Uniform1d ? 1 : 2; }

Vec draw_scenario_score(Scenario s, Rng& rng) {
    switch (s) {
        case Scenario::Gaussian2d: {
            // Covariance [[1, 0.8], [0.8, 1]] via its Cholesky factor.
            const double z1 = rng.normal(), z2 = rng.normal();
            return {z1, 0.8 * z1 + 0.6 * z2};
        }
        case Scenario::Banana2d: {
            const double z1 = rng.normal(), z2 = rng.normal();
            const double x_err = 15.0 * z1;
            const double y_err = 15.0 * z2 + 24.0 * (z1 * z1 - 1.0);
            const double c = std::numbers::sqrt2 / 2.0;
            return {c * x_err - c * y_err, c * x_err + c * y_err};
        }
        case Scenario::Uniform1d:
            return {rng.uniform()};
    }
    throw std::logic_error("unhandled scenario");
}

namespace {

grid::GridPlan scenario_plan(const SimulationConfig& config, bool pit_mode) {
    if (config.plan) return *config.plan;
    if (pit_mode && config.scenario == Scenario::Uniform1d) {
        // One-sided 1D layout {0, 1/n, ..., 1}: n+1 shells of mass 1/(n+1).
        grid::GridPlan plan;
        plan.n_plus_1 = config.n + 1;
        plan.n_radii = config.n;
        plan.n_dirs = 1;
        plan.n_origin = 1;
        plan.direction_seed = config.seed;
        return plan;
    }
    return grid::plan_decomposition(config.n + 1, scenario_dim(config.scenario),
                                    config.alpha, config.seed);
}

grid::SphericalGrid scenario_grid(const SimulationConfig& config,
                                  const grid::GridPlan& plan) {
    if (!config.plan && config.scenario == Scenario::Uniform1d && plan.n_dirs == 1) {
        std::vector<Vec> pts;
        pts.reserve(static_cast<std::size_t>(plan.n_plus_1));
        for (int k = 0; k < plan.n_origin; ++k) pts.push_back({0.0});
        for (int j = 1; j <= plan.n_radii; ++j)
            pts.push_back({static_cast<double>(j) / static_cast<double>(plan.n_radii)});
        return grid::grid_from_points(std::move(pts), plan.n_origin, plan.n_dirs,
                                      plan.n_radii);
    }
    return grid::build_grid(plan, scenario_dim(config.scenario));
}

// Runs fn(rep) for rep in [0, reps) across a small thread pool; fn must only
// write to its own slot.
void parallel_reps(long reps, int threads, const std::function<void(long)>& fn) {
    int n_threads = threads > 0 ? threads
                                : static_cast<int>(std::thread::hardware_concurrency());
    if (n_threads < 1) n_threads = 1;
    n_threads = std::min<long>(n_threads, std::max(1L, reps));
    if (n_threads == 1) {
        for (long rep = 0; rep < reps; ++rep) fn(rep);
        return;
    }
    std::vector<std::future<void>> futs;
    futs.reserve(static_cast<std::size_t>(n_threads));
    std::atomic<long> next{0};
    for (int t = 0; t < n_threads; ++t)
        futs.push_back(std::async(std::launch::async, [&] {
            for (long rep = next.fetch_add(1); rep < reps; rep = next.fetch_add(1))
                fn(rep);
        }));
    for (auto& f : futs) f.get();
}

}  // namespace

CoverageReport simulate_coverage(const SimulationConfig& config) {
    if (config.n < 1) throw std::invalid_argument("need at least one calibration point");
    if (config.replications < 1) throw std::invalid_argument("need replications");
    const grid::GridPlan plan = scenario_plan(config, false);
    const grid::SphericalGrid base_grid =
        scenario_grid(config, plan);
    const RadiusSelection sel = conformal_radius(base_grid, config.alpha);

    std::vector<char> hit(static_cast<std::size_t>(config.replications), 0);
    parallel_reps(config.replications, config.threads, [&](long rep) {
        Rng rng(substream_seed(config.seed, static_cast<std::uint64_t>(rep)));
        std::vector<Vec> calib;
        calib.reserve(static_cast<std::size_t>(config.n));
        for (int i = 0; i < config.n; ++i)
            calib.push_back(draw_scenario_score(config.scenario, rng));
        const Vec test = draw_scenario_score(config.scenario, rng);
        auto artifact = partition::fit(std::move(calib), base_grid);
        hit[static_cast<std::size_t>(rep)] =
            region_contains_score(artifact, sel.radius, test) ? 1 : 0;
    });

    CoverageReport report;
    report.trials = config.replications;
    for (char h : hit) report.hits += h;
    report.empirical_coverage =
        static_cast<double>(report.hits) / static_cast<double>(report.trials);
    report.nominal = sel.nominal_mass;
    report.binomial_95_halfwidth = stats::binomial_halfwidth(sel.nominal_mass,
                                                             report.trials);
    report.plan = plan;
    report.radius = sel;
    return report;
}

PitHistogram pit_histogram(const SimulationConfig& config) {
    if (config.n < 1) throw std::invalid_argument("need at least one calibration point");
    if (config.replications < 1) throw std::invalid_argument("need replications");
    const grid::GridPlan plan = scenario_plan(config, true);
    const grid::SphericalGrid base_grid = scenario_grid(config, plan);

    const int n_bins = base_grid.n_radii + 1;
    std::vector<int> shell(static_cast<std::size_t>(config.replications), 0);
    parallel_reps(config.replications, config.threads, [&](long rep) {
        Rng rng(substream_seed(config.seed, static_cast<std::uint64_t>(rep)));
        std::vector<Vec> calib;
        calib.reserve(static_cast<std::size_t>(config.n));
        for (int i = 0; i < config.n; ++i)
            calib.push_back(draw_scenario_score(config.scenario, rng));
        const Vec test = draw_scenario_score(config.scenario, rng);
        auto artifact = partition::fit(std::move(calib), base_grid);
        shell[static_cast<std::size_t>(rep)] =
            artifact.grid.shell_of(artifact.core.assign_index(test));
    });

    PitHistogram hist;
    hist.total = config.replications;
    hist.counts.assign(static_cast<std::size_t>(n_bins), 0);
    for (int s : shell) ++hist.counts[static_cast<std::size_t>(s)];
    hist.radii.resize(static_cast<std::size_t>(n_bins));
    hist.expected_mass.resize(static_cast<std::size_t>(n_bins));
    hist.observed_freq.resize(static_cast<std::size_t>(n_bins));
    const double n_plus_1 = static_cast<double>(base_grid.total());
    std::vector<double> observed, expected;
    for (int b = 0; b < n_bins; ++b) {
        hist.radii[static_cast<std::size_t>(b)] =
            static_cast<double>(b) / static_cast<double>(base_grid.n_radii);
        const double mass = (b == 0 ? static_cast<double>(base_grid.n_origin)
                                    : static_cast<double>(base_grid.n_dirs)) /
                            n_plus_1;
        hist.expected_mass[static_cast<std::size_t>(b)] = mass;
        hist.observed_freq[static_cast<std::size_t>(b)] =
            static_cast<double>(hist.counts[static_cast<std::size_t>(b)]) /
            static_cast<double>(hist.total);
        observed.push_back(static_cast<double>(hist.counts[static_cast<std::size_t>(b)]));
        expected.push_back(mass * static_cast<double>(hist.total));
    }
    const auto gof = stats::chi_square_gof(observed, expected);
    hist.chi_square = gof.statistic;
    hist.dof = gof.dof;
    hist.p_value = gof.p_value;
    return hist;
}

}  // namespace otcp::conformal
