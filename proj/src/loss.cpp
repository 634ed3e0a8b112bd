#include "pax/loss.hpp"

#include <algorithm>
#include <cmath>

#include "pax/error.hpp"

namespace pax {

bool is_classification(LossKind loss) { return loss == LossKind::BinaryLogistic; }

std::string loss_name(LossKind loss) {
    return loss == LossKind::BinaryLogistic ? "logistic" : "squared";
}

LossKind loss_from_name(const std::string& name) {
    if (name == "logistic") return LossKind::BinaryLogistic;
    if (name == "squared") return LossKind::SquaredError;
    throw ConfigError("unknown loss '" + name + "' (expected 'logistic' or 'squared')");
}

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

void validate_label(LossKind loss, double y) {
    if (!std::isfinite(y)) throw LabelError("label is not finite");
    if (loss == LossKind::BinaryLogistic && y != 0.0 && y != 1.0) {
        throw LabelError("binary logistic loss requires labels in {0,1}, got " + std::to_string(y));
    }
}

GradHessPair grad_hess(LossKind loss, double y, double y_hat_raw) {
    validate_label(loss, y);
    if (loss == LossKind::SquaredError) {
        return {y_hat_raw - y, 1.0};
    }
    const double p = sigmoid(y_hat_raw);
    return {p - y, std::max(p * (1.0 - p), 1e-16)};
}

double loss_value(LossKind loss, double y, double y_hat_raw) {
    validate_label(loss, y);
    if (loss == LossKind::SquaredError) {
        const double d = y_hat_raw - y;
        return 0.5 * d * d;
    }
    // softplus(x) - y*x = -[y log p + (1-y) log(1-p)]
    const double softplus = std::max(y_hat_raw, 0.0) + std::log1p(std::exp(-std::abs(y_hat_raw)));
    return softplus - y * y_hat_raw;
}

}  // namespace pax
