#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pax/histogram.hpp"

namespace pax {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kAggregatorId = "aggregator";

enum class MessageType {
    DataCountQuery,
    DataCountReply,
    EpsilonAssign,
    ModelBroadcast,
    GradientReply,
    Terminate,
};

std::string message_type_name(MessageType t);
MessageType message_type_from_name(const std::string& name);

// Envelope for everything that crosses the party/aggregator boundary:
// {type, round, sender, receiver, payload, schema_version}.
struct Message {
    MessageType type = MessageType::DataCountQuery;
    int round = -1;  // -1 for setup traffic
    std::string sender;
    std::string receiver;
    nlohmann::json payload;

    std::string to_json() const;
    static Message from_json(const std::string& text);
};

// Decoded gradient reply. Round 0 carries the party's bin structure
// (edges, representatives, sketch, per-sample bin assignments); every round
// carries the per-bin sums plus the per-sample gradient pairs the
// aggregator needs to grow a full-depth tree.
struct GradientPayload {
    double epsilon = 0.0;
    std::int64_t count = 0;
    double loss_sum = 0.0;
    std::vector<BinStats> features;
    std::vector<double> grad;
    std::vector<double> hess;
    std::optional<SurrogateHistogram> structure;
    std::vector<std::uint32_t> assignments;  // row-major, with structure only
};

nlohmann::json encode_gradient_payload(const GradientPayload& p);
GradientPayload decode_gradient_payload(const nlohmann::json& j);

nlohmann::json encode_histogram(const SurrogateHistogram& hist);
SurrogateHistogram decode_histogram(const nlohmann::json& j);

}  // namespace pax
