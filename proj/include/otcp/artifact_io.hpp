#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "otcp/common.hpp"
#include "otcp/conformal.hpp"
#include "otcp/partition.hpp"
#include "otcp/semidiscrete.hpp"

namespace otcp::io {

inline constexpr int kFormatVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

// On-disk fit result.  Doubles are serialized as shortest round-trip
// decimals, so save -> load -> save reproduces the file byte for byte.
struct ArtifactFile {
    std::string mode = "discrete";  // or "semidiscrete"
    double alpha = 0.0;
    conformal::RadiusSelection radius;
    std::uint64_t seed = 0;
    partition::PartitionArtifact discrete;
    std::optional<semidiscrete::SdPartitionArtifact> sd;
    std::optional<std::string> created_utc;  // absent with --no-meta

    bool is_semidiscrete() const { return mode == "semidiscrete"; }
};

std::string artifact_to_string(const ArtifactFile& artifact);
void save_artifact(const ArtifactFile& artifact, const std::string& path);
ArtifactFile load_artifact(const std::string& path);

// Score tables: header "score_1,...,score_d", optional leading "id" column.
struct ScoreTable {
    std::vector<std::string> ids;  // empty when the file has no id column
    std::vector<Vec> rows;
    int dim = 0;
};

ScoreTable read_score_csv(const std::string& path);
ScoreTable parse_score_csv(const std::string& text, const std::string& origin);

}  // namespace otcp::io
