#include "otcp/partition.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "otcp/lap.hpp"
#include "otcp/rng.hpp"

namespace otcp::partition {

int StreamCore::assign_index(const Vec& z) const {
    if (static_cast<int>(z.size()) != dim)
        throw std::invalid_argument("query dimension mismatch");
    int best = 0;
    // ||z||^2 is common to all k and drops out of the argmin.
    double best_g = std::numeric_limits<double>::infinity();
    for (int k = 0; k < total(); ++k) {
        const double g = -2.0 * dot(z, targets[static_cast<std::size_t>(k)]) +
                         target_sqnorm[static_cast<std::size_t>(k)] +
                         leave_out_costs[static_cast<std::size_t>(k)];
        if (g < best_g) {
            best_g = g;
            best = k;
        }
    }
    return best;
}

StreamCore fit_stream(std::vector<Vec> calib_scores, std::vector<Vec> targets,
                      std::vector<double> target_sqnorm) {
    if (targets.empty()) throw std::invalid_argument("no targets");
    if (targets.size() != calib_scores.size() + 1)
        throw std::invalid_argument("need exactly n+1 targets for n calibration scores");
    if (target_sqnorm.size() != targets.size())
        throw std::invalid_argument("target_sqnorm size mismatch");
    const int dim = static_cast<int>(targets.front().size());
    for (const auto& t : targets)
        if (static_cast<int>(t.size()) != dim)
            throw std::invalid_argument("target dimension mismatch");
    for (const auto& z : calib_scores) {
        if (static_cast<int>(z.size()) != dim)
            throw std::invalid_argument("calibration score dimension mismatch");
        if (!all_finite(z))
            throw std::invalid_argument("calibration score not finite");
    }

    StreamCore core;
    core.dim = dim;
    core.targets = std::move(targets);
    core.target_sqnorm = std::move(target_sqnorm);
    core.calib_scores = std::move(calib_scores);

    const std::size_t n = core.calib_scores.size();
    const std::size_t m = n + 1;
    if (n == 0) {
        core.leave_out_costs.assign(1, 0.0);
        core.sub_assignments.assign(1, {});
        return core;
    }

    // Moment-form squared distances so the semi-discrete stream can reuse
    // this path bit-for-bit with point cells.
    std::vector<double> entries;
    entries.reserve(n * m);
    for (const auto& z : core.calib_scores) {
        const double zz = sqnorm(z);
        for (std::size_t k = 0; k < m; ++k)
            entries.push_back(zz - 2.0 * dot(z, core.targets[k]) + core.target_sqnorm[k]);
    }
    // Moment-form costs can dip microscopically below zero for coincident
    // points; clamp rather than reject.
    for (auto& e : entries) e = std::max(0.0, e);

    lap::CostMatrix cost(n, m, std::move(entries));
    auto loo = lap::leave_one_out(cost);
    core.leave_out_costs = std::move(loo.costs);
    core.sub_assignments = std::move(loo.assignments);
    return core;
}

PartitionArtifact fit(std::vector<Vec> calib_scores, grid::SphericalGrid grid) {
    if (grid.total() != static_cast<int>(calib_scores.size()) + 1)
        throw std::invalid_argument("grid size must be one more than score count");
    std::vector<double> sqnorms;
    sqnorms.reserve(grid.points.size());
    for (const auto& p : grid.points) sqnorms.push_back(sqnorm(p));
    PartitionArtifact artifact;
    artifact.core = fit_stream(std::move(calib_scores), grid.points, std::move(sqnorms));
    artifact.grid = std::move(grid);
    return artifact;
}

AssignResult assign(const PartitionArtifact& artifact, const Vec& z) {
    AssignResult out;
    out.k_star = artifact.core.assign_index(z);
    out.f_value = artifact.core.stream_cost(z, out.k_star);
    out.target = artifact.core.targets[static_cast<std::size_t>(out.k_star)];
    out.sub_assignment =
        &artifact.core.sub_assignments[static_cast<std::size_t>(out.k_star)];
    return out;
}

double Region::membership_margin(const Vec& z) const {
    double margin = -std::numeric_limits<double>::infinity();
    if (normals.empty()) return 0.0;  // single target: everything belongs
    for (std::size_t r = 0; r < normals.size(); ++r)
        margin = std::max(margin, dot(z, normals[r]) - offsets[r]);
    return margin;
}

Region region(const StreamCore& core, int j) {
    if (j < 0 || j >= core.total()) throw std::out_of_range("region index");
    Region reg;
    reg.index = j;
    const Vec& tj = core.targets[static_cast<std::size_t>(j)];
    for (int k = 0; k < core.total(); ++k) {
        if (k == j) continue;
        const Vec& tk = core.targets[static_cast<std::size_t>(k)];
        if (tk == tj) {
            reg.duplicate_indices.push_back(k);
            continue;
        }
        reg.comparison_indices.push_back(k);
        reg.normals.push_back(sub(tk, tj));
        reg.offsets.push_back(core.beta(j, k));
    }
    return reg;
}

Boundedness check_bounded(const StreamCore& core, int j,
                          const std::vector<double>& target_norms, int ray_samples,
                          std::uint64_t seed) {
    if (j < 0 || j >= core.total()) throw std::out_of_range("region index");
    if (target_norms[static_cast<std::size_t>(j)] < 1.0 - 1e-12)
        return Boundedness::ProvenBounded;

    Region reg = region(core, j);
    if (reg.normals.empty()) return Boundedness::ProvenUnbounded;  // whole space

    auto recedes = [&](const Vec& v) {
        for (const auto& a : reg.normals)
            if (dot(v, a) > 1e-12) return false;
        return true;
    };

    // The target's own direction certifies the outermost shells; seeded rays
    // cover everything else.
    const Vec& tj = core.targets[static_cast<std::size_t>(j)];
    if (norm(tj) > 0.0 && recedes(tj)) return Boundedness::ProvenUnbounded;
    Rng rng(substream_seed(seed, "bounded-rays"));
    for (int s = 0; s < ray_samples; ++s) {
        Vec v = rng.normal_vec(core.dim);
        const double len = norm(v);
        if (len < 1e-12) continue;
        for (auto& x : v) x /= len;
        if (recedes(v)) return Boundedness::ProvenUnbounded;
    }
    return Boundedness::Unknown;
}

}  // namespace otcp::partition
