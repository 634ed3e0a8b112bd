#pragma once

#include <string>

namespace pax {

enum class LossKind {
    BinaryLogistic,  // labels in {0,1}, raw scores are logits
    SquaredError,    // any finite real label
};

bool is_classification(LossKind loss);

std::string loss_name(LossKind loss);
LossKind loss_from_name(const std::string& name);

struct GradHessPair {
    double g = 0.0;
    double h = 0.0;
};

double sigmoid(double x);

// First/second derivative of the loss at the current raw prediction.
// SquaredError uses the 1/2 (y_hat - y)^2 convention so that g = y_hat - y
// and h = 1 exactly; BinaryLogistic gives g = p - y, h = p (1 - p) with the
// hessian floored at 1e-16 to keep leaf denominators positive.
GradHessPair grad_hess(LossKind loss, double y, double y_hat_raw);

// Per-sample loss value matching the derivatives above. BinaryLogistic is
// cross-entropy of sigmoid(y_hat_raw), evaluated via a stable softplus.
double loss_value(LossKind loss, double y, double y_hat_raw);

// Throws LabelError if y is invalid for the loss.
void validate_label(LossKind loss, double y);

}  // namespace pax
