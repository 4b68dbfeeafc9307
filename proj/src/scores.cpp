#include "otcp/scores.hpp"

#include <cmath>
#include <stdexcept>

namespace otcp::scores {

const char* score_kind_name(ScoreKind kind) {
    switch (kind) {
        case ScoreKind::Residual: return "residual";
        case ScoreKind::Ensemble: return "ensemble";
        case ScoreKind::Classification: return "classification";
        case ScoreKind::Custom: return "custom";
    }
    return "?";
}

ScoreVector residual_score(const Vec& y, const Vec& prediction) {
    if (y.size() != prediction.size())
        throw std::invalid_argument("outcome and prediction dimensions differ");
    if (!all_finite(y) || !all_finite(prediction))
        throw std::invalid_argument("residual inputs must be finite");
    return {sub(y, prediction), ScoreKind::Residual};
}

ScoreVector ensemble_score(double y, const Vec& predictions) {
    if (predictions.empty()) throw std::invalid_argument("empty ensemble");
    if (!std::isfinite(y) || !all_finite(predictions))
        throw std::invalid_argument("ensemble inputs must be finite");
    Vec values(predictions.size());
    for (std::size_t i = 0; i < predictions.size(); ++i) values[i] = y - predictions[i];
    return {std::move(values), ScoreKind::Ensemble};
}

ScoreVector classification_score(const Vec& one_hot, const Vec& probabilities) {
    if (one_hot.size() != probabilities.size())
        throw std::invalid_argument("label and probability dimensions differ");
    if (one_hot.empty()) throw std::invalid_argument("empty classification score");
    int ones = 0;
    for (double x : one_hot) {
        if (x == 1.0)
            ++ones;
        else if (x != 0.0)
            throw std::invalid_argument("label must be one-hot");
    }
    if (ones != 1) throw std::invalid_argument("label must be one-hot");
    double total = 0.0;
    for (double p : probabilities) {
        if (!std::isfinite(p) || p < 0.0)
            throw std::invalid_argument("probabilities must be non-negative");
        total += p;
    }
    if (std::fabs(total - 1.0) > 1e-9)
        throw std::invalid_argument("probabilities must sum to one");
    return {sub(one_hot, probabilities), ScoreKind::Classification};
}

}  // namespace otcp::scores
