#include "otcp/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "otcp/artifact_io.hpp"
#include "otcp/common.hpp"
#include "otcp/conformal.hpp"
#include "otcp/cpd.hpp"
#include "otcp/errors.hpp"
#include "otcp/grid.hpp"
#include "otcp/partition.hpp"
#include "otcp/rng.hpp"
#include "otcp/scores.hpp"
#include "otcp/semidiscrete.hpp"

namespace otcp::cli {

namespace {

using Json = nlohmann::ordered_json;

// Shortest round-trip decimal, matching the artifact serialization.
std::string fmt(double x) { return nlohmann::json(x).dump(); }

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(
        std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

bool parse_real(const std::string& field, double& out) {
    try {
        std::size_t used = 0;
        out = std::stod(field, &used);
        return used == field.size();
    } catch (...) {
        return false;
    }
}

Vec parse_comma_reals(const std::string& text, const std::string& flag) {
    Vec values;
    std::stringstream ss(text);
    std::string field;
    while (std::getline(ss, field, ',')) {
        double x = 0.0;
        if (!parse_real(field, x))
            throw ConfigError("cannot parse '" + field + "' in " + flag);
        values.push_back(x);
    }
    if (values.empty()) throw ConfigError(flag + " needs at least one value");
    return values;
}

grid::GridPlan parse_grid_spec(const std::string& text, std::uint64_t seed) {
    std::vector<int> parts;
    std::stringstream ss(text);
    std::string field;
    while (std::getline(ss, field, ',')) {
        try {
            std::size_t used = 0;
            parts.push_back(std::stoi(field, &used));
            if (used != field.size()) throw std::invalid_argument(field);
        } catch (...) {
            throw ConfigError("cannot parse '" + field + "' in --grid");
        }
    }
    if (parts.size() != 3)
        throw ConfigError("--grid expects nR,nS,nO");
    grid::GridPlan plan;
    plan.n_radii = parts[0];
    plan.n_dirs = parts[1];
    plan.n_origin = parts[2];
    if (plan.n_radii < 1 || plan.n_dirs < 1 || plan.n_origin < 0)
        throw ConfigError("--grid needs nR >= 1, nS >= 1, nO >= 0");
    plan.n_plus_1 = plan.n_radii * plan.n_dirs + plan.n_origin;
    plan.direction_seed = seed;
    return plan;
}

const char* bounded_name(partition::Boundedness b) {
    switch (b) {
        case partition::Boundedness::ProvenBounded: return "proven-bounded";
        case partition::Boundedness::ProvenUnbounded: return "proven-unbounded";
        case partition::Boundedness::Unknown: return "unknown";
    }
    return "unknown";
}

struct FitOptions {
    std::string scores_path;
    std::string out_path;
    std::string mode = "discrete";
    std::string grid_spec;
    double alpha = 0.1;
    std::uint64_t seed = 0;
    long mc_samples = 200000;
    double mass_tol = 5e-3;
    int max_iterations = 2000;
    bool no_meta = false;
};

int cmd_fit(const FitOptions& opt, std::ostream& out, std::ostream& err) {
    io::ScoreTable table = io::read_score_csv(opt.scores_path);
    const int n_plus_1 = static_cast<int>(table.rows.size()) + 1;

    grid::GridPlan plan;
    if (!opt.grid_spec.empty()) {
        plan = parse_grid_spec(opt.grid_spec, opt.seed);
        if (plan.n_plus_1 != n_plus_1)
            throw ConfigError("--grid sums to " + std::to_string(plan.n_plus_1) +
                              " targets but the score table needs " +
                              std::to_string(n_plus_1));
    } else {
        const int max_origin = opt.mode == "semidiscrete" ? 1 : -1;
        plan = grid::plan_decomposition(n_plus_1, table.dim, opt.alpha, opt.seed,
                                        max_origin);
    }

    grid::SphericalGrid g = grid::build_grid(plan, table.dim);

    io::ArtifactFile artifact;
    artifact.mode = opt.mode;
    artifact.alpha = opt.alpha;
    artifact.seed = opt.seed;
    artifact.radius = conformal::conformal_radius(g, opt.alpha);

    if (opt.mode == "discrete") {
        artifact.discrete = partition::fit(std::move(table.rows), std::move(g));
    } else if (opt.mode == "semidiscrete") {
        if (plan.n_origin > 1)
            throw ConfigError("semidiscrete mode needs distinct sites "
                              "(at most one origin copy)");
        auto diagram = semidiscrete::fit_weights(g.points, opt.mc_samples,
                                                 opt.mass_tol, opt.seed,
                                                 opt.max_iterations);
        auto moments = semidiscrete::cell_moments(diagram);
        if (moments.low_count_warning)
            err << "warning: some cells saw few Monte Carlo samples; "
                   "increase --mc-samples for tighter moments\n";
        auto sd = semidiscrete::fit_sd_partition(std::move(table.rows),
                                                 std::move(diagram),
                                                 std::move(moments));
        artifact.discrete.grid = std::move(g);
        // Mirror the stream into the discrete view, matching what a reload
        // produces.
        artifact.discrete.core = sd.core;
        artifact.sd = std::move(sd);
    } else {
        throw ConfigError("unknown mode: " + opt.mode);
    }

    if (!opt.no_meta) artifact.created_utc = utc_now();
    io::save_artifact(artifact, opt.out_path);

    out << "grid: n_radii=" << plan.n_radii << " n_dirs=" << plan.n_dirs
        << " n_origin=" << plan.n_origin << " (n+1=" << plan.n_plus_1 << ")\n";
    out << "j_alpha=" << artifact.radius.j_alpha
        << " r_alpha=" << fmt(artifact.radius.radius)
        << " nominal_mass=" << fmt(artifact.radius.nominal_mass) << "\n";
    if (artifact.sd)
        out << "semidiscrete: mass_deviation="
            << fmt(artifact.sd->diagram.achieved_mass_deviation)
            << " mc_samples=" << artifact.sd->diagram.mc_sample_size << "\n";
    if (artifact.radius.outermost)
        err << "warning: region may be unbounded (r=1)\n";
    out << "wrote " << opt.out_path << "\n";
    return 0;
}

struct PredictOptions {
    std::string artifact_path;
    std::string candidates_path;
    std::string prediction_spec;
    std::string out_path;
    bool cpd = false;
    bool randomized = false;
    std::uint64_t seed = 0;
};

int cmd_predict(const PredictOptions& opt, std::ostream& out, std::ostream&) {
    const io::ArtifactFile artifact = io::load_artifact(opt.artifact_path);
    const io::ScoreTable table = io::read_score_csv(opt.candidates_path);
    const int dim = artifact.discrete.grid.dim;
    if (table.dim != dim)
        throw ConfigError("candidate dimension " + std::to_string(table.dim) +
                          " does not match artifact dimension " +
                          std::to_string(dim));
    if (opt.randomized && !artifact.is_semidiscrete())
        throw ConfigError("mode mismatch: --randomized needs a semidiscrete "
                          "artifact");

    const bool has_prediction = !opt.prediction_spec.empty();
    Vec prediction(static_cast<std::size_t>(dim), 0.0);
    if (has_prediction) {
        prediction = parse_comma_reals(opt.prediction_spec, "--prediction");
        if (static_cast<int>(prediction.size()) != dim)
            throw ConfigError("--prediction dimension does not match artifact");
    }

    const double r = artifact.radius.radius;
    std::vector<int> active;
    if (artifact.is_semidiscrete()) active = semidiscrete::active_cells(*artifact.sd, r);

    std::ofstream file;
    if (!opt.out_path.empty()) {
        file.open(opt.out_path, std::ios::binary);
        if (!file) throw IoError("cannot open " + opt.out_path + " for writing");
    }
    std::ostream& sink = opt.out_path.empty() ? out : file;

    Rng rng(substream_seed(opt.seed, "randomized-transport"));
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const Vec& y = table.rows[i];
        cpd::CpdEvaluation ev;
        bool member = false;
        if (artifact.is_semidiscrete()) {
            if (opt.randomized) {
                ev = has_prediction
                         ? cpd::cpd_evaluate_randomized(y, prediction, *artifact.sd, rng)
                         : cpd::cpd_evaluate_score_randomized(
                               {y, scores::ScoreKind::Custom}, *artifact.sd, rng);
            } else {
                const Vec score = has_prediction ? sub(y, prediction) : y;
                ev.candidate = y;
                ev.score = score;
                ev.score_kind = has_prediction ? scores::ScoreKind::Residual
                                               : scores::ScoreKind::Custom;
                ev.monotonicity_guaranteed = has_prediction;
                ev.k_star = artifact.sd->core.assign_index(score);
                ev.vector_rank =
                    artifact.sd->core.targets[static_cast<std::size_t>(ev.k_star)];
                ev.norm_rank = norm(ev.vector_rank);
            }
            member = std::binary_search(active.begin(), active.end(), ev.k_star);
        } else {
            ev = has_prediction
                     ? cpd::cpd_evaluate(y, prediction, artifact.discrete)
                     : cpd::cpd_evaluate_score({y, scores::ScoreKind::Custom},
                                               artifact.discrete);
            member = ev.norm_rank <= r + 1e-12;
        }

        Json line;
        line["index"] = i;
        if (!table.ids.empty()) line["id"] = table.ids[i];
        line["candidate"] = y;
        line["member"] = member;
        line["k_star"] = ev.k_star;
        line["norm_rank"] = ev.norm_rank;
        if (opt.cpd) {
            line["vector_rank"] = ev.vector_rank;
            line["score_kind"] = scores::score_kind_name(ev.score_kind);
            line["monotonicity_guaranteed"] = ev.monotonicity_guaranteed;
        }
        if (opt.randomized) {
            line["randomized_norm"] = *ev.randomized_norm;
            line["randomized_point"] = *ev.randomized_point;
        }
        sink << line.dump() << "\n";
    }
    if (!opt.out_path.empty() && !file) throw IoError("failed writing " + opt.out_path);
    return 0;
}

struct SimulateOptions {
    std::string scenario = "gaussian";
    int n = 99;
    double alpha = 0.1;
    long reps = 1000;
    std::uint64_t seed = 0;
    std::string grid_spec;
    bool pit = false;
    int threads = 0;
};

int cmd_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err) {
    conformal::SimulationConfig config;
    config.scenario = conformal::scenario_from_name(opt.scenario);
    config.n = opt.n;
    config.alpha = opt.alpha;
    config.replications = opt.reps;
    config.seed = opt.seed;
    config.threads = opt.threads;
    if (!opt.grid_spec.empty()) {
        auto plan = parse_grid_spec(opt.grid_spec, opt.seed);
        if (plan.n_plus_1 != opt.n + 1)
            throw ConfigError("--grid sums to " + std::to_string(plan.n_plus_1) +
                              " targets but n+1 is " + std::to_string(opt.n + 1));
        config.plan = plan;
    }

    if (opt.pit) {
        const auto hist = conformal::pit_histogram(config);
        out << "shell,radius,expected_mass,observed_freq,count\n";
        for (std::size_t b = 0; b < hist.radii.size(); ++b)
            out << b << "," << fmt(hist.radii[b]) << "," << fmt(hist.expected_mass[b])
                << "," << fmt(hist.observed_freq[b]) << "," << hist.counts[b] << "\n";
        err << "chi_square=" << fmt(hist.chi_square) << " dof=" << hist.dof
            << " p_value=" << fmt(hist.p_value) << "\n";
        return 0;
    }

    const auto report = conformal::simulate_coverage(config);
    out << "scenario,n,alpha,reps,seed,n_radii,n_dirs,n_origin,j_alpha,r_alpha,"
           "nominal,empirical,halfwidth95\n";
    out << opt.scenario << "," << opt.n << "," << fmt(opt.alpha) << "," << opt.reps
        << "," << opt.seed << "," << report.plan.n_radii << "," << report.plan.n_dirs
        << "," << report.plan.n_origin << "," << report.radius.j_alpha << ","
        << fmt(report.radius.radius) << "," << fmt(report.nominal) << ","
        << fmt(report.empirical_coverage) << "," << fmt(report.binomial_95_halfwidth)
        << "\n";
    return 0;
}

struct ExportOptions {
    std::string artifact_path;
    std::string out_path;
    std::string prediction_spec;
    double r = -1.0;  // negative: use the artifact's level-alpha radius
};

int cmd_export_region(const ExportOptions& opt, std::ostream& out, std::ostream&) {
    const io::ArtifactFile artifact = io::load_artifact(opt.artifact_path);
    const double r = opt.r < 0.0 ? artifact.radius.radius : opt.r;
    if (r > 1.0) throw ConfigError("--r must lie in [0, 1]");

    const bool has_prediction = !opt.prediction_spec.empty();
    Vec prediction;
    if (has_prediction) {
        prediction = parse_comma_reals(opt.prediction_spec, "--prediction");
        if (static_cast<int>(prediction.size()) != artifact.discrete.grid.dim)
            throw ConfigError("--prediction dimension does not match artifact");
    }

    std::vector<int> active;
    const partition::StreamCore* core = nullptr;
    if (artifact.is_semidiscrete()) {
        active = semidiscrete::active_cells(*artifact.sd, r);
        core = &artifact.sd->core;
    } else {
        active = conformal::quantile_region(artifact.discrete, r).active_indices;
        core = &artifact.discrete.core;
    }

    Json doc;
    doc["format_version"] = io::kFormatVersion;
    doc["mode"] = artifact.mode;
    doc["radius"] = r;
    doc["nominal_mass"] = static_cast<double>(active.size()) /
                          static_cast<double>(core->total());
    if (has_prediction) doc["prediction"] = prediction;
    doc["active_indices"] = active;

    Json regions = Json::array();
    std::vector<char> covered(static_cast<std::size_t>(core->total()), 0);
    for (int j : active) {
        if (covered[static_cast<std::size_t>(j)]) continue;
        partition::Region reg = partition::region(*core, j);
        covered[static_cast<std::size_t>(j)] = 1;
        for (int d : reg.duplicate_indices) covered[static_cast<std::size_t>(d)] = 1;
        reg.bounded = artifact.is_semidiscrete()
                          ? semidiscrete::check_bounded_sd(*artifact.sd, j)
                          : partition::check_bounded(*core, j,
                                                     artifact.discrete.grid.norms);
        if (has_prediction)
            for (std::size_t row = 0; row < reg.offsets.size(); ++row)
                reg.offsets[row] += dot(prediction, reg.normals[row]);
        Json rj;
        rj["index"] = reg.index;
        rj["duplicates"] = reg.duplicate_indices;
        rj["comparisons"] = reg.comparison_indices;
        rj["normals"] = reg.normals;
        rj["offsets"] = reg.offsets;
        rj["bounded"] = bounded_name(reg.bounded);
        regions.push_back(std::move(rj));
    }
    doc["regions"] = std::move(regions);

    std::ofstream file(opt.out_path, std::ios::binary);
    if (!file) throw IoError("cannot open " + opt.out_path + " for writing");
    file << doc.dump() << "\n";
    if (!file) throw IoError("failed writing " + opt.out_path);
    out << "exported " << doc["regions"].size() << " regions ("
        << active.size() << " active indices) to " << opt.out_path << "\n";
    return 0;
}

}  // namespace

int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Conformal prediction with vector scores via optimal transport"};
    app.require_subcommand(1);

    FitOptions fit;
    auto* cmd_f = app.add_subcommand("fit", "Fit an artifact from a score table");
    cmd_f->add_option("--scores", fit.scores_path, "Calibration score CSV")->required();
    cmd_f->add_option("--alpha", fit.alpha, "Miscoverage level in (0, 1)");
    cmd_f->add_option("--grid", fit.grid_spec, "Target grid as nR,nS,nO");
    cmd_f->add_option("--mode", fit.mode, "discrete or semidiscrete")
        ->check(CLI::IsMember({"discrete", "semidiscrete"}));
    cmd_f->add_option("--seed", fit.seed, "Master seed");
    cmd_f->add_option("--mc-samples", fit.mc_samples,
                      "Monte Carlo sample size (semidiscrete)");
    cmd_f->add_option("--mass-tol", fit.mass_tol,
                      "Cell mass tolerance (semidiscrete)");
    cmd_f->add_option("--max-iterations", fit.max_iterations,
                      "Dual ascent iteration cap (semidiscrete)");
    cmd_f->add_option("--out", fit.out_path, "Artifact output path")->required();
    cmd_f->add_flag("--no-meta", fit.no_meta, "Omit the timestamp block");

    PredictOptions pred;
    auto* cmd_p = app.add_subcommand("predict", "Evaluate candidates against an artifact");
    cmd_p->add_option("--artifact", pred.artifact_path, "Fitted artifact JSON")->required();
    cmd_p->add_option("--candidates", pred.candidates_path, "Candidate CSV")->required();
    cmd_p->add_option("--prediction", pred.prediction_spec,
                      "Point prediction as comma-separated reals; candidates are "
                      "treated as raw scores when omitted");
    cmd_p->add_option("--out", pred.out_path, "Write JSON lines here instead of stdout");
    cmd_p->add_flag("--cpd", pred.cpd, "Include vector ranks");
    cmd_p->add_flag("--randomized", pred.randomized,
                    "Draw randomized ranks (semidiscrete artifacts only)");
    cmd_p->add_option("--seed", pred.seed, "Seed for the randomized draw");

    SimulateOptions sim;
    auto* cmd_s = app.add_subcommand("simulate", "Coverage and calibration experiments");
    cmd_s->add_option("--scenario", sim.scenario, "gaussian, banana, or uniform1d")
        ->required();
    cmd_s->add_option("--n", sim.n, "Calibration points per replication");
    cmd_s->add_option("--alpha", sim.alpha, "Miscoverage level");
    cmd_s->add_option("--reps", sim.reps, "Replications");
    cmd_s->add_option("--seed", sim.seed, "Master seed");
    cmd_s->add_option("--grid", sim.grid_spec, "Target grid as nR,nS,nO");
    cmd_s->add_option("--threads", sim.threads, "Worker threads (0: hardware)");
    cmd_s->add_flag("--pit", sim.pit, "Emit the shell frequency table instead");

    ExportOptions exp;
    auto* cmd_e = app.add_subcommand("export-region",
                                     "Export the active regions as half-space data");
    cmd_e->add_option("--artifact", exp.artifact_path, "Fitted artifact JSON")->required();
    cmd_e->add_option("--r", exp.r, "Region radius (default: the fitted r_alpha)")
        ->check(CLI::Range(0.0, 1.0));
    cmd_e->add_option("--prediction", exp.prediction_spec,
                      "Translate half-spaces by this point prediction");
    cmd_e->add_option("--out", exp.out_path, "Region JSON output path")->required();

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 3;
    }

    try {
        if (app.got_subcommand(cmd_f)) return cmd_fit(fit, out, err);
        if (app.got_subcommand(cmd_p)) return cmd_predict(pred, out, err);
        if (app.got_subcommand(cmd_s)) return cmd_simulate(sim, out, err);
        if (app.got_subcommand(cmd_e)) return cmd_export_region(exp, out, err);
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const ConvergenceError& e) {
        err << "error: " << e.what() << " (achieved " << fmt(e.achieved()) << ")\n";
        return 4;
    } catch (const SamplingError& e) {
        err << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 3;
}

}  // namespace otcp::cli
