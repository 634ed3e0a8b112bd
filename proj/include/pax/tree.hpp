#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pax/loss.hpp"

namespace pax {

// Missing feature values are carried as quiet NaN end to end.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double x) { return std::isnan(x); }

enum class Direction { Left, Right };

// One node of a strict binary CART tree. Internal nodes route on
// x[feature] <= threshold (missing values take default_dir); leaves carry
// the unshrunk optimal weight -G/(H+lambda).
struct Node {
    enum class Kind { Internal, Leaf } kind = Kind::Leaf;
    int feature = -1;
    double threshold = 0.0;
    Direction default_dir = Direction::Left;
    int left = -1;
    int right = -1;
    double weight = 0.0;

    static Node leaf(double w) {
        Node n;
        n.kind = Kind::Leaf;
        n.weight = w;
        return n;
    }
    static Node internal(int feature, double threshold, Direction def, int left, int right) {
        Node n;
        n.kind = Kind::Internal;
        n.feature = feature;
        n.threshold = threshold;
        n.default_dir = def;
        n.left = left;
        n.right = right;
        return n;
    }
};

struct Tree {
    std::vector<Node> nodes;  // node 0 is the root
    int depth = 0;            // longest root-to-leaf path, in edges

    bool empty() const { return nodes.empty(); }
    std::size_t leaf_count() const;

    // Raw (unshrunk) leaf weight reached by x.
    double predict_row(std::span<const double> x) const;
};

// Additive model: prediction = base_score + learning_rate * sum of tree
// outputs. Weights are stored unshrunk; shrinkage is applied at read time.
struct Ensemble {
    LossKind loss = LossKind::BinaryLogistic;
    double base_score = 0.0;
    double learning_rate = 0.3;
    std::vector<Tree> trees;

    double predict(std::span<const double> x) const;
    double predict_proba(std::span<const double> x) const;  // BinaryLogistic only

    std::string to_json() const;
    static Ensemble from_json(const std::string& text);
};

}  // namespace pax
