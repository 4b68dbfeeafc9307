#include "otcp/cpd.hpp"

#include <algorithm>
#include <stdexcept>

#include "otcp/stats.hpp"

namespace otcp::cpd {

CpdEvaluation cpd_evaluate(const Vec& y, const Vec& prediction,
                           const partition::PartitionArtifact& artifact) {
    CpdEvaluation ev = cpd_evaluate_score(scores::residual_score(y, prediction), artifact);
    ev.candidate = y;
    return ev;
}

CpdEvaluation cpd_evaluate_score(const scores::ScoreVector& score,
                                 const partition::PartitionArtifact& artifact) {
    CpdEvaluation ev;
    ev.candidate = score.values;
    ev.score = score.values;
    ev.score_kind = score.kind;
    ev.monotonicity_guaranteed = score.kind == scores::ScoreKind::Residual;
    ev.k_star = artifact.core.assign_index(score.values);
    ev.vector_rank = artifact.core.targets[static_cast<std::size_t>(ev.k_star)];
    // Discrete norms are exact shell radii; report those bits rather than a
    // square root of the rounded point.
    ev.norm_rank = artifact.grid.norms[static_cast<std::size_t>(ev.k_star)];
    return ev;
}

CpdEvaluation cpd_evaluate_randomized(const Vec& y, const Vec& prediction,
                                      const semidiscrete::SdPartitionArtifact& artifact,
                                      Rng& rng) {
    CpdEvaluation ev = cpd_evaluate_score_randomized(
        scores::residual_score(y, prediction), artifact, rng);
    ev.candidate = y;
    return ev;
}

CpdEvaluation cpd_evaluate_score_randomized(const scores::ScoreVector& score,
                                            const semidiscrete::SdPartitionArtifact& artifact,
                                            Rng& rng) {
    CpdEvaluation ev;
    ev.candidate = score.values;
    ev.score = score.values;
    ev.score_kind = score.kind;
    ev.monotonicity_guaranteed = score.kind == scores::ScoreKind::Residual;
    auto draw = semidiscrete::randomized_transport(score.values, artifact, rng);
    ev.k_star = draw.k_star;
    ev.vector_rank = artifact.core.targets[static_cast<std::size_t>(draw.k_star)];
    ev.norm_rank = norm(ev.vector_rank);
    ev.randomized_norm = draw.norm;
    ev.randomized_point = std::move(draw.point);
    return ev;
}

DempsterHillInterval dempster_hill(double y, const std::vector<double>& sample,
                                   std::optional<double> tau) {
    if (sample.empty()) throw std::invalid_argument("empty sample");
    if (tau && (*tau < 0.0 || *tau > 1.0))
        throw std::invalid_argument("tau must lie in [0, 1]");
    long below = 0, ties = 1;  // the candidate ties with itself
    for (double s : sample) {
        if (s < y)
            ++below;
        else if (s == y)
            ++ties;
    }
    const double n_plus_1 = static_cast<double>(sample.size()) + 1.0;
    DempsterHillInterval out;
    out.lower = static_cast<double>(below) / n_plus_1;
    out.upper = static_cast<double>(below + ties) / n_plus_1;
    if (tau) out.randomized_value = out.lower + *tau * (out.upper - out.lower);
    return out;
}

DhPitReport dh_pit_suite(DhGenerator generator, int n, long replications,
                         std::uint64_t seed, bool randomize_tau) {
    if (n < 1 || replications < 1)
        throw std::invalid_argument("need a sample size and replications");
    std::vector<double> pit;
    pit.reserve(static_cast<std::size_t>(replications));
    Rng rng(substream_seed(seed, "dempster-hill-pit"));
    for (long rep = 0; rep < replications; ++rep) {
        auto draw = [&]() {
            return generator == DhGenerator::Normal ? rng.normal()
                                                    : (rng.uniform() < 0.5 ? 0.0 : 1.0);
        };
        std::vector<double> sample(static_cast<std::size_t>(n));
        for (auto& s : sample) s = draw();
        const double held_out = draw();
        const double tau = randomize_tau ? rng.uniform() : 0.0;
        pit.push_back(*dempster_hill(held_out, sample, tau).randomized_value);
    }
    DhPitReport report;
    report.replications = replications;
    report.ks_statistic = stats::ks_statistic_uniform(std::move(pit));
    report.ks_critical_5pct =
        stats::ks_critical(0.05, static_cast<std::size_t>(replications));
    report.pass = report.ks_statistic < report.ks_critical_5pct;
    return report;
}

}  // namespace otcp::cpd
