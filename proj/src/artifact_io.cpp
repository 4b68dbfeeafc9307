#include "otcp/artifact_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "otcp/errors.hpp"

namespace otcp::io {

namespace {

using Json = nlohmann::ordered_json;

Json grid_to_json(const grid::SphericalGrid& g) {
    Json j;
    j["dim"] = g.dim;
    j["n_radii"] = g.n_radii;
    j["n_dirs"] = g.n_dirs;
    j["n_origin"] = g.n_origin;
    j["direction_seed"] = g.direction_seed;
    j["points"] = g.points;
    j["norms"] = g.norms;
    return j;
}

grid::SphericalGrid grid_from_json(const Json& j) {
    grid::SphericalGrid g;
    g.dim = j.at("dim").get<int>();
    g.n_radii = j.at("n_radii").get<int>();
    g.n_dirs = j.at("n_dirs").get<int>();
    g.n_origin = j.at("n_origin").get<int>();
    g.direction_seed = j.at("direction_seed").get<std::uint64_t>();
    g.points = j.at("points").get<std::vector<Vec>>();
    g.norms = j.at("norms").get<std::vector<double>>();
    if (g.norms.size() != g.points.size() ||
        static_cast<int>(g.points.size()) != g.total())
        throw IoError("artifact grid is inconsistent");
    return g;
}

Json core_to_json(const partition::StreamCore& core) {
    Json j;
    j["calib_scores"] = core.calib_scores;
    j["leave_out_costs"] = core.leave_out_costs;
    std::vector<std::vector<double>> beta(
        static_cast<std::size_t>(core.total()),
        std::vector<double>(static_cast<std::size_t>(core.total()), 0.0));
    for (int a = 0; a < core.total(); ++a)
        for (int b = 0; b < core.total(); ++b)
            if (a != b)
                beta[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
                    core.beta(a, b);
    j["halfspace_offsets"] = beta;
    j["sub_assignments"] = core.sub_assignments;
    return j;
}

void core_from_json(const Json& j, partition::StreamCore& core) {
    core.calib_scores = j.at("calib_scores").get<std::vector<Vec>>();
    core.leave_out_costs = j.at("leave_out_costs").get<std::vector<double>>();
    core.sub_assignments = j.at("sub_assignments").get<std::vector<std::vector<int>>>();
    if (core.leave_out_costs.size() != core.targets.size() ||
        core.sub_assignments.size() != core.targets.size() ||
        core.calib_scores.size() + 1 != core.targets.size())
        throw IoError("artifact stream tables are inconsistent");
    const auto beta = j.at("halfspace_offsets").get<std::vector<std::vector<double>>>();
    for (int a = 0; a < core.total(); ++a)
        for (int b = 0; b < core.total(); ++b) {
            const double expected = a == b ? 0.0 : core.beta(a, b);
            if (beta[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] != expected)
                throw IoError("artifact half-space offsets disagree with its costs");
        }
}

}  // namespace

std::string artifact_to_string(const ArtifactFile& artifact) {
    Json j;
    j["format_version"] = kFormatVersion;
    j["tool_version"] = kToolVersion;
    j["mode"] = artifact.mode;
    j["alpha"] = artifact.alpha;
    j["j_alpha"] = artifact.radius.j_alpha;
    j["r_alpha"] = artifact.radius.radius;
    j["nominal_mass"] = artifact.radius.nominal_mass;
    j["outermost_warning"] = artifact.radius.outermost;
    j["seed"] = artifact.seed;
    j["grid"] = grid_to_json(artifact.discrete.grid);
    j.update(core_to_json(artifact.is_semidiscrete() ? artifact.sd->core
                                                     : artifact.discrete.core));
    if (artifact.is_semidiscrete()) {
        const auto& sd = *artifact.sd;
        Json s;
        s["weights"] = sd.diagram.weights;
        s["mass_estimates"] = sd.diagram.mass_estimates;
        s["mc_sample_size"] = sd.diagram.mc_sample_size;
        s["mc_seed"] = sd.diagram.mc_seed;
        s["mass_tol"] = sd.diagram.mass_tol;
        s["achieved_mass_deviation"] = sd.diagram.achieved_mass_deviation;
        s["degenerate_points"] = sd.diagram.degenerate_points;
        s["cell_means"] = sd.moments.means;
        s["cell_second_moments"] = sd.moments.second_moments;
        s["cell_max_norms"] = sd.moments.max_norms;
        s["cell_counts"] = sd.moments.counts;
        s["low_count_warning"] = sd.moments.low_count_warning;
        j["semidiscrete"] = std::move(s);
    }
    if (artifact.created_utc) {
        Json meta;
        meta["created_utc"] = *artifact.created_utc;
        meta["tool"] = std::string("otcp ") + kToolVersion;
        j["meta"] = std::move(meta);
    }
    return j.dump() + "\n";
}

void save_artifact(const ArtifactFile& artifact, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << artifact_to_string(artifact);
    if (!out) throw IoError("failed writing " + path);
}

ArtifactFile load_artifact(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    Json j;
    try {
        in >> j;
    } catch (const Json::parse_error& e) {
        throw IoError("cannot parse " + path + ": " + e.what());
    }
    try {
        ArtifactFile artifact;
        if (j.at("format_version").get<int>() != kFormatVersion)
            throw IoError("unsupported artifact format version");
        artifact.mode = j.at("mode").get<std::string>();
        if (artifact.mode != "discrete" && artifact.mode != "semidiscrete")
            throw IoError("unknown artifact mode: " + artifact.mode);
        artifact.alpha = j.at("alpha").get<double>();
        artifact.radius.j_alpha = j.at("j_alpha").get<int>();
        artifact.radius.radius = j.at("r_alpha").get<double>();
        artifact.radius.nominal_mass = j.at("nominal_mass").get<double>();
        artifact.radius.outermost = j.at("outermost_warning").get<bool>();
        artifact.seed = j.at("seed").get<std::uint64_t>();
        artifact.discrete.grid = grid_from_json(j.at("grid"));

        if (artifact.mode == "discrete") {
            auto& core = artifact.discrete.core;
            core.dim = artifact.discrete.grid.dim;
            core.targets = artifact.discrete.grid.points;
            core.target_sqnorm.clear();
            for (const auto& p : core.targets) core.target_sqnorm.push_back(sqnorm(p));
            core_from_json(j, core);
        } else {
            semidiscrete::SdPartitionArtifact sd;
            const Json& s = j.at("semidiscrete");
            sd.diagram.sites = artifact.discrete.grid.points;
            sd.diagram.weights = s.at("weights").get<std::vector<double>>();
            sd.diagram.mass_estimates = s.at("mass_estimates").get<std::vector<double>>();
            sd.diagram.mc_sample_size = s.at("mc_sample_size").get<long>();
            sd.diagram.mc_seed = s.at("mc_seed").get<std::uint64_t>();
            sd.diagram.mass_tol = s.at("mass_tol").get<double>();
            sd.diagram.achieved_mass_deviation =
                s.at("achieved_mass_deviation").get<double>();
            sd.diagram.degenerate_points = s.at("degenerate_points").get<bool>();
            sd.moments.means = s.at("cell_means").get<std::vector<Vec>>();
            sd.moments.second_moments =
                s.at("cell_second_moments").get<std::vector<double>>();
            sd.moments.max_norms = s.at("cell_max_norms").get<std::vector<double>>();
            sd.moments.counts = s.at("cell_counts").get<std::vector<long>>();
            sd.moments.low_count_warning = s.at("low_count_warning").get<bool>();
            auto& core = sd.core;
            core.dim = artifact.discrete.grid.dim;
            core.targets = sd.moments.means;
            core.target_sqnorm = sd.moments.second_moments;
            core_from_json(j, core);
            // The discrete view shares the stream so callers can inspect it.
            artifact.discrete.core = core;
            artifact.sd = std::move(sd);
        }
        if (j.contains("meta"))
            artifact.created_utc = j.at("meta").at("created_utc").get<std::string>();
        return artifact;
    } catch (const Json::exception& e) {
        throw IoError("malformed artifact " + path + ": " + e.what());
    }
}

namespace {

bool parse_double(const std::string& field, double& out) {
    try {
        std::size_t used = 0;
        out = std::stod(field, &used);
        while (used < field.size() &&
               (field[used] == ' ' || field[used] == '\t' || field[used] == '\r'))
            ++used;
        return used == field.size();
    } catch (...) {
        return false;
    }
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

std::string trimmed(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t'))
        s.pop_back();
    std::size_t start = 0;
    while (start < s.size() && (s[start] == ' ' || s[start] == '\t')) ++start;
    return s.substr(start);
}

}  // namespace

ScoreTable parse_score_csv(const std::string& text, const std::string& origin) {
    std::stringstream in(text);
    std::string line;
    long line_no = 0;
    ScoreTable table;
    bool has_id = false;
    if (!std::getline(in, line))
        throw ParseError(origin + ": empty score table", 1);
    ++line_no;
    auto header = split_csv_line(line);
    for (auto& h : header) h = trimmed(h);
    std::size_t first_score = 0;
    if (!header.empty() && header[0] == "id") {
        has_id = true;
        first_score = 1;
    }
    if (header.size() == first_score)
        throw ParseError(origin + ": header has no score columns", line_no);
    for (std::size_t c = first_score; c < header.size(); ++c) {
        const std::string expected = "score_" + std::to_string(c - first_score + 1);
        if (header[c] != expected)
            throw ParseError(origin + ": expected header column '" + expected +
                                 "', found '" + header[c] + "'",
                             line_no);
    }
    table.dim = static_cast<int>(header.size() - first_score);

    while (std::getline(in, line)) {
        ++line_no;
        if (trimmed(line).empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw ParseError(origin + ": expected " + std::to_string(header.size()) +
                                 " fields, found " + std::to_string(fields.size()),
                             line_no);
        Vec row(static_cast<std::size_t>(table.dim));
        for (int c = 0; c < table.dim; ++c) {
            const std::string field = trimmed(fields[first_score + static_cast<std::size_t>(c)]);
            if (!parse_double(field, row[static_cast<std::size_t>(c)]))
                throw ParseError(origin + ": cannot parse '" + field + "' as a number",
                                 line_no);
            if (!std::isfinite(row[static_cast<std::size_t>(c)]))
                throw ParseError(origin + ": non-finite value", line_no);
        }
        if (has_id) table.ids.push_back(trimmed(fields[0]));
        table.rows.push_back(std::move(row));
    }
    if (table.rows.empty())
        throw ParseError(origin + ": no data rows", line_no);
    return table;
}

ScoreTable read_score_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_score_csv(buf.str(), path);
}

}  // namespace otcp::io
