#pragma once

#include <string>
#include <vector>

#include "otcp/common.hpp"

namespace otcp::scores {

enum class ScoreKind { Residual, Ensemble, Classification, Custom };

const char* score_kind_name(ScoreKind kind);

struct ScoreVector {
    Vec values;
    ScoreKind kind = ScoreKind::Custom;
};

// Plain residual y - prediction; the one score whose transport map is
// monotone in y.
ScoreVector residual_score(const Vec& y, const Vec& prediction);

// Per-model residuals of a scalar outcome against an ensemble of point
// predictions: a shared bias moves all coordinates together, disagreement
// spreads them.
ScoreVector ensemble_score(double y, const Vec& predictions);

// One-hot label minus predicted class probabilities; coordinates sum to
// zero.  Probabilities must lie on the simplex.
ScoreVector classification_score(const Vec& one_hot, const Vec& probabilities);

}  // namespace otcp::scores
