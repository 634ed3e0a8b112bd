#include "pax/tree.hpp"

#include <json.hpp>

#include "pax/error.hpp"

namespace pax {

using nlohmann::json;

std::size_t Tree::leaf_count() const {
    std::size_t k = 0;
    for (const auto& n : nodes) {
        if (n.kind == Node::Kind::Leaf) ++k;
    }
    return k;
}

double Tree::predict_row(std::span<const double> x) const {
    if (nodes.empty()) return 0.0;
    int id = 0;
    while (nodes[static_cast<std::size_t>(id)].kind == Node::Kind::Internal) {
        const Node& n = nodes[static_cast<std::size_t>(id)];
        if (n.feature < 0 || static_cast<std::size_t>(n.feature) >= x.size()) {
            throw DimensionError("feature vector has " + std::to_string(x.size()) +
                                 " entries but tree routes on feature " + std::to_string(n.feature));
        }
        const double v = x[static_cast<std::size_t>(n.feature)];
        bool go_left;
        if (is_missing(v)) {
            go_left = n.default_dir == Direction::Left;
        } else {
            go_left = v <= n.threshold;
        }
        id = go_left ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(id)].weight;
}

double Ensemble::predict(std::span<const double> x) const {
    double acc = 0.0;
    for (const auto& t : trees) acc += t.predict_row(x);
    return base_score + learning_rate * acc;
}

double Ensemble::predict_proba(std::span<const double> x) const {
    return sigmoid(predict(x));
}

namespace {

json node_to_json(const Node& n) {
    json j;
    if (n.kind == Node::Kind::Leaf) {
        j["kind"] = "leaf";
        j["weight"] = n.weight;
    } else {
        j["kind"] = "internal";
        j["feature"] = n.feature;
        j["threshold"] = n.threshold;
        j["default"] = n.default_dir == Direction::Left ? "left" : "right";
        j["left"] = n.left;
        j["right"] = n.right;
    }
    return j;
}

Node node_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "leaf") {
        return Node::leaf(j.at("weight").get<double>());
    }
    if (kind != "internal") throw ProtocolError("unknown node kind '" + kind + "'");
    const std::string def = j.at("default").get<std::string>();
    if (def != "left" && def != "right") throw ProtocolError("unknown default direction '" + def + "'");
    return Node::internal(j.at("feature").get<int>(), j.at("threshold").get<double>(),
                          def == "left" ? Direction::Left : Direction::Right,
                          j.at("left").get<int>(), j.at("right").get<int>());
}

}  // namespace

std::string Ensemble::to_json() const {
    json j;
    j["loss"] = loss_name(loss);
    j["base_score"] = base_score;
    j["learning_rate"] = learning_rate;
    json trees_j = json::array();
    for (const auto& t : trees) {
        json nodes_j = json::array();
        for (const auto& n : t.nodes) nodes_j.push_back(node_to_json(n));
        trees_j.push_back(json{{"nodes", std::move(nodes_j)}, {"depth", t.depth}});
    }
    j["trees"] = std::move(trees_j);
    return j.dump();
}

Ensemble Ensemble::from_json(const std::string& text) {
    json j = json::parse(text);
    Ensemble e;
    e.loss = loss_from_name(j.at("loss").get<std::string>());
    e.base_score = j.at("base_score").get<double>();
    e.learning_rate = j.at("learning_rate").get<double>();
    for (const auto& tj : j.at("trees")) {
        Tree t;
        t.depth = tj.at("depth").get<int>();
        for (const auto& nj : tj.at("nodes")) t.nodes.push_back(node_from_json(nj));
        for (const auto& n : t.nodes) {
            if (n.kind == Node::Kind::Internal) {
                const auto sz = static_cast<int>(t.nodes.size());
                if (n.left < 0 || n.left >= sz || n.right < 0 || n.right >= sz) {
                    throw ProtocolError("tree node child id out of range");
                }
            }
        }
        e.trees.push_back(std::move(t));
    }
    return e;
}

}  // namespace pax
