#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "otcp/artifact_io.hpp"
#include "otcp/cli.hpp"
#include "otcp/conformal.hpp"
#include "otcp/cpd.hpp"
#include "otcp/rng.hpp"

using Json = nlohmann::ordered_json;
using otcp::cli::run_cli;

namespace {

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

CliResult run(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = run_cli(std::move(args), out, err);
    return {code, out.str(), err.str()};
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& p) : path(p) {}
    ~TempFile() { std::remove(path.c_str()); }
};

void write_file(const std::string& path, const std::string& text) {
    std::ofstream(path, std::ios::binary) << text;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
}

// Deterministic 2D score table with n rows.
std::string gaussian_csv(int n, std::uint64_t seed, double scale = 0.6) {
    otcp::Rng rng(seed);
    std::string text = "score_1,score_2\n";
    for (int i = 0; i < n; ++i) {
        text += Json(scale * rng.normal()).dump();
        text += ",";
        text += Json(scale * rng.normal()).dump();
        text += "\n";
    }
    return text;
}

}  // namespace

TEST_CASE("fit reports the planned grid and selected radius") {
    TempFile scores("cli_fit_scores.csv");
    TempFile artifact("cli_fit_artifact.json");
    write_file(scores.path, gaussian_csv(99, 400));

    auto res = run({"fit", "--scores", scores.path, "--alpha", "0.1", "--out",
                    artifact.path, "--no-meta"});
    CAPTURE(res.err);
    CHECK(res.code == 0);
    CHECK(res.out.find("grid: n_radii=10 n_dirs=9 n_origin=10 (n+1=100)") !=
          std::string::npos);
    CHECK(res.out.find("j_alpha=9 r_alpha=0.9 nominal_mass=0.91") != std::string::npos);
    CHECK(res.out.find("wrote " + artifact.path) != std::string::npos);
    CHECK(res.err.empty());

    auto art = otcp::io::load_artifact(artifact.path);
    CHECK(art.mode == "discrete");
    CHECK(!art.created_utc.has_value());
}

TEST_CASE("fit warns when the selected region touches the outermost shell") {
    TempFile scores("cli_fit_outer_scores.csv");
    TempFile artifact("cli_fit_outer_artifact.json");
    write_file(scores.path, gaussian_csv(99, 401));
    auto res = run({"fit", "--scores", scores.path, "--alpha", "0.1", "--grid",
                    "9,11,1", "--out", artifact.path, "--no-meta"});
    CHECK(res.code == 0);
    CHECK(res.err.find("warning: region may be unbounded (r=1)") != std::string::npos);
}

TEST_CASE("fit with a fixed seed is byte-for-byte reproducible") {
    TempFile scores("cli_fit_repro_scores.csv");
    TempFile a("cli_fit_repro_a.json");
    TempFile b("cli_fit_repro_b.json");
    write_file(scores.path, gaussian_csv(19, 402));

    std::vector<std::string> base{"fit",   "--scores", scores.path, "--alpha", "0.25",
                                  "--mode", "semidiscrete", "--seed", "5", "--mc-samples",
                                  "50000", "--mass-tol", "0.01", "--no-meta"};
    auto first = base;
    first.insert(first.end(), {"--out", a.path});
    auto second = base;
    second.insert(second.end(), {"--out", b.path});
    CHECK(run(first).code == 0);
    CHECK(run(second).code == 0);
    CHECK(slurp(a.path) == slurp(b.path));
}

TEST_CASE("fit rejects a grid that disagrees with the score count") {
    TempFile scores("cli_fit_badgrid_scores.csv");
    write_file(scores.path, gaussian_csv(10, 403));
    auto res = run({"fit", "--scores", scores.path, "--grid", "3,3,3", "--out",
                    "unused.json"});
    CHECK(res.code == 3);
    CHECK(!res.err.empty());
}

TEST_CASE("malformed score files exit with the IO code and a line number") {
    TempFile scores("cli_fit_bad_scores.csv");
    write_file(scores.path, "score_1,score_2\n0.5,0.5\noops,1.0\n");
    auto res = run({"fit", "--scores", scores.path, "--out", "unused.json"});
    CHECK(res.code == 2);
    CHECK(res.err.find("(line 3)") != std::string::npos);
}

TEST_CASE("predict emits one json line per candidate consistent with the library") {
    TempFile scores("cli_predict_scores.csv");
    TempFile artifact("cli_predict_artifact.json");
    TempFile cand("cli_predict_cand.csv");
    write_file(scores.path, gaussian_csv(99, 404));
    REQUIRE(run({"fit", "--scores", scores.path, "--alpha", "0.1", "--out",
                 artifact.path, "--no-meta"})
                .code == 0);
    write_file(cand.path,
               "id,score_1,score_2\nalpha,0.05,-0.1\nbeta,1.4,1.2\ngamma,0.0,0.0\n");

    auto res = run({"predict", "--artifact", artifact.path, "--candidates", cand.path,
                    "--cpd"});
    CHECK(res.code == 0);

    auto art = otcp::io::load_artifact(artifact.path);
    double r = art.radius.radius;

    std::istringstream lines(res.out);
    std::string line;
    int count = 0;
    std::vector<std::string> ids{"alpha", "beta", "gamma"};
    while (std::getline(lines, line)) {
        REQUIRE(!line.empty());
        Json row = Json::parse(line);
        CHECK(row["index"] == count);
        CHECK(row["id"] == ids[count]);
        otcp::Vec y{row["candidate"][0].get<double>(), row["candidate"][1].get<double>()};
        auto ev = otcp::cpd::cpd_evaluate(y, {0.0, 0.0}, art.discrete);
        CHECK(row["k_star"].get<int>() == ev.k_star);
        CHECK(row["norm_rank"].get<double>() == ev.norm_rank);
        CHECK(row["member"].get<bool>() == (ev.norm_rank <= r + 1e-12));
        // Without --prediction the rows are raw scores, not residuals.
        CHECK(row["score_kind"] == "custom");
        CHECK(!row["monotonicity_guaranteed"].get<bool>());
        REQUIRE(row.contains("vector_rank"));
        CHECK(row["vector_rank"][0].get<double>() == ev.vector_rank[0]);
        ++count;
    }
    CHECK(count == 3);
}

TEST_CASE("predict applies the prediction shift to candidates") {
    TempFile scores("cli_predict_shift_scores.csv");
    TempFile artifact("cli_predict_shift_artifact.json");
    TempFile cand("cli_predict_shift_cand.csv");
    write_file(scores.path, gaussian_csv(35, 405));
    REQUIRE(run({"fit", "--scores", scores.path, "--alpha", "0.2", "--out",
                 artifact.path, "--no-meta"})
                .code == 0);
    // Candidate equal to the prediction scores zero.
    write_file(cand.path, "score_1,score_2\n0.7,-0.4\n");
    auto res = run({"predict", "--artifact", artifact.path, "--candidates", cand.path,
                    "--prediction", "0.7,-0.4", "--cpd"});
    CHECK(res.code == 0);
    Json row = Json::parse(res.out.substr(0, res.out.find('\n')));
    auto art = otcp::io::load_artifact(artifact.path);
    auto ev = otcp::cpd::cpd_evaluate({0.7, -0.4}, {0.7, -0.4}, art.discrete);
    CHECK(row["k_star"].get<int>() == ev.k_star);
    CHECK(row["norm_rank"].get<double>() == ev.norm_rank);
}

TEST_CASE("randomized prediction needs a semidiscrete artifact") {
    TempFile scores("cli_predict_rand_scores.csv");
    TempFile artifact("cli_predict_rand_artifact.json");
    TempFile cand("cli_predict_rand_cand.csv");
    write_file(scores.path, gaussian_csv(99, 406));
    REQUIRE(run({"fit", "--scores", scores.path, "--out", artifact.path, "--no-meta"})
                .code == 0);
    write_file(cand.path, "score_1,score_2\n0.1,0.1\n");
    auto res = run({"predict", "--artifact", artifact.path, "--candidates", cand.path,
                    "--randomized"});
    CHECK(res.code == 3);
    CHECK(res.err.find("mode mismatch") != std::string::npos);
}

TEST_CASE("randomized prediction on a semidiscrete artifact emits extra fields") {
    TempFile scores("cli_predict_sd_scores.csv");
    TempFile artifact("cli_predict_sd_artifact.json");
    TempFile cand("cli_predict_sd_cand.csv");
    write_file(scores.path, gaussian_csv(19, 407));
    REQUIRE(run({"fit", "--scores", scores.path, "--alpha", "0.25", "--mode",
                 "semidiscrete", "--seed", "9", "--mc-samples", "50000", "--mass-tol",
                 "0.01", "--out", artifact.path, "--no-meta"})
                .code == 0);
    write_file(cand.path, "score_1,score_2\n0.2,0.1\n-0.4,0.3\n");
    auto res = run({"predict", "--artifact", artifact.path, "--candidates", cand.path,
                    "--randomized", "--seed", "3"});
    CHECK(res.code == 0);
    std::istringstream lines(res.out);
    std::string line;
    while (std::getline(lines, line)) {
        Json row = Json::parse(line);
        REQUIRE(row.contains("randomized_norm"));
        REQUIRE(row.contains("randomized_point"));
        CHECK(row["randomized_norm"].get<double>() >= 0.0);
        CHECK(row["randomized_norm"].get<double>() <= 1.0);
    }

    // Same seed, same draws.
    auto again = run({"predict", "--artifact", artifact.path, "--candidates", cand.path,
                      "--randomized", "--seed", "3"});
    CHECK(again.out == res.out);
}

TEST_CASE("simulate prints a one-row coverage table") {
    auto res = run({"simulate", "--scenario", "gaussian", "--n", "99", "--alpha", "0.1",
                    "--reps", "300", "--seed", "12"});
    CHECK(res.code == 0);
    CHECK(res.out.find("scenario,n,alpha,reps,seed,n_radii,n_dirs,n_origin,j_alpha,"
                       "r_alpha,nominal,empirical,halfwidth95") != std::string::npos);
    CHECK(res.out.find("gaussian,99,0.1,300,12,10,9,10,9,0.9,0.91,") != std::string::npos);
}

TEST_CASE("simulate rejects unknown scenarios") {
    auto res = run({"simulate", "--scenario", "mystery", "--reps", "10"});
    CHECK(res.code == 3);
    CHECK(res.err.find("unknown scenario") != std::string::npos);
}

TEST_CASE("simulate --pit prints shell frequencies close to the grid masses") {
    auto res = run({"simulate", "--scenario", "uniform1d", "--n", "4", "--reps", "4000",
                    "--seed", "2", "--pit"});
    CHECK(res.code == 0);
    CHECK(res.out.find("shell,radius,expected_mass,observed_freq,count") !=
          std::string::npos);
    CHECK(res.err.find("chi_square=") != std::string::npos);
    std::istringstream lines(res.out);
    std::string line;
    std::getline(lines, line);  // header
    int shells = 0;
    while (std::getline(lines, line)) {
        if (line.empty()) continue;
        // shell,radius,expected,observed,count
        auto p1 = line.find(',');
        auto p2 = line.find(',', p1 + 1);
        auto p3 = line.find(',', p2 + 1);
        auto p4 = line.find(',', p3 + 1);
        double expected = std::stod(line.substr(p2 + 1, p3 - p2 - 1));
        double observed = std::stod(line.substr(p3 + 1, p4 - p3 - 1));
        CHECK(expected == doctest::Approx(0.2));
        CHECK(std::abs(observed - expected) < 0.03);
        ++shells;
    }
    CHECK(shells == 5);
}

TEST_CASE("export-region writes half-space descriptions consistent with the library") {
    TempFile scores("cli_export_scores.csv");
    TempFile artifact("cli_export_artifact.json");
    TempFile doc("cli_export_doc.json");
    write_file(scores.path, gaussian_csv(99, 408));
    REQUIRE(run({"fit", "--scores", scores.path, "--alpha", "0.1", "--out",
                 artifact.path, "--no-meta"})
                .code == 0);

    auto res = run({"export-region", "--artifact", artifact.path, "--out", doc.path});
    CHECK(res.code == 0);
    Json doc_json = Json::parse(slurp(doc.path));
    CHECK(doc_json["format_version"] == 1);
    CHECK(doc_json["mode"] == "discrete");
    CHECK(doc_json["radius"].get<double>() == 0.9);
    CHECK(doc_json["active_indices"].size() == 91);
    CHECK(doc_json["nominal_mass"].get<double>() == doctest::Approx(0.91));
    CHECK(!doc_json.contains("prediction"));

    auto art = otcp::io::load_artifact(artifact.path);
    int canonical = 0;
    for (const auto& reg : doc_json["regions"]) {
        ++canonical;
        int j = reg["index"].get<int>();
        auto lib = otcp::partition::region(art.discrete.core, j);
        REQUIRE(reg["normals"].size() == lib.normals.size());
        REQUIRE(reg["offsets"].size() == lib.offsets.size());
        for (std::size_t row = 0; row < lib.offsets.size(); ++row)
            CHECK(reg["offsets"][row].get<double>() == lib.offsets[row]);
        CHECK(reg["bounded"] == "proven-bounded");
    }
    // 10 origin copies collapse into one canonical region: 91 - 10 + 1 = 82.
    CHECK(canonical == 82);
}

TEST_CASE("export-region translates offsets by the prediction") {
    TempFile scores("cli_export_shift_scores.csv");
    TempFile artifact("cli_export_shift_artifact.json");
    TempFile plain("cli_export_shift_plain.json");
    TempFile moved("cli_export_shift_moved.json");
    write_file(scores.path, gaussian_csv(35, 409));
    REQUIRE(run({"fit", "--scores", scores.path, "--alpha", "0.2", "--out",
                 artifact.path, "--no-meta"})
                .code == 0);
    REQUIRE(run({"export-region", "--artifact", artifact.path, "--out", plain.path})
                .code == 0);
    REQUIRE(run({"export-region", "--artifact", artifact.path, "--prediction",
                 "0.5,-1.25", "--out", moved.path})
                .code == 0);

    Json a = Json::parse(slurp(plain.path));
    Json b = Json::parse(slurp(moved.path));
    CHECK(b["prediction"][0].get<double>() == 0.5);
    CHECK(b["prediction"][1].get<double>() == -1.25);
    REQUIRE(a["regions"].size() == b["regions"].size());
    for (std::size_t i = 0; i < a["regions"].size(); ++i) {
        const auto& ra = a["regions"][i];
        const auto& rb = b["regions"][i];
        for (std::size_t row = 0; row < ra["offsets"].size(); ++row) {
            double nx = ra["normals"][row][0].get<double>();
            double ny = ra["normals"][row][1].get<double>();
            double shifted = ra["offsets"][row].get<double>() + 0.5 * nx - 1.25 * ny;
            CHECK(rb["offsets"][row].get<double>() == doctest::Approx(shifted).epsilon(1e-12));
        }
    }
}

TEST_CASE("export-region at radius zero keeps only the origin cell") {
    TempFile scores("cli_export_zero_scores.csv");
    TempFile artifact("cli_export_zero_artifact.json");
    TempFile doc("cli_export_zero_doc.json");
    write_file(scores.path, gaussian_csv(99, 410));
    REQUIRE(run({"fit", "--scores", scores.path, "--alpha", "0.1", "--out",
                 artifact.path, "--no-meta"})
                .code == 0);
    REQUIRE(run({"export-region", "--artifact", artifact.path, "--r", "0", "--out",
                 doc.path})
                .code == 0);
    Json doc_json = Json::parse(slurp(doc.path));
    CHECK(doc_json["active_indices"].size() == 10);
    CHECK(doc_json["regions"].size() == 1);
    CHECK(doc_json["regions"][0]["duplicates"].size() == 9);
}

TEST_CASE("missing subcommand and bad flags exit with the config code") {
    CHECK(run({}).code == 3);
    CHECK(run({"fit"}).code == 3);                      // missing required flags
    CHECK(run({"export-region", "--artifact", "x.json", "--r", "2.0", "--out",
               "y.json"})
              .code == 3);                              // r outside [0, 1]
    CHECK(run({"frobnicate"}).code == 3);
}

TEST_CASE("help text exits cleanly") {
    auto res = run({"--help"});
    CHECK(res.code == 0);
    CHECK(res.out.find("fit") != std::string::npos);
    CHECK(res.out.find("predict") != std::string::npos);
}
