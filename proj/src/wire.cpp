#include "pax/wire.hpp"

#include "pax/error.hpp"

namespace pax {

using nlohmann::json;

std::string message_type_name(MessageType t) {
    switch (t) {
        case MessageType::DataCountQuery: return "data_count_query";
        case MessageType::DataCountReply: return "data_count_reply";
        case MessageType::EpsilonAssign: return "epsilon_assign";
        case MessageType::ModelBroadcast: return "model_broadcast";
        case MessageType::GradientReply: return "gradient_reply";
        case MessageType::Terminate: return "terminate";
    }
    throw ProtocolError("unknown message type");
}

MessageType message_type_from_name(const std::string& name) {
    if (name == "data_count_query") return MessageType::DataCountQuery;
    if (name == "data_count_reply") return MessageType::DataCountReply;
    if (name == "epsilon_assign") return MessageType::EpsilonAssign;
    if (name == "model_broadcast") return MessageType::ModelBroadcast;
    if (name == "gradient_reply") return MessageType::GradientReply;
    if (name == "terminate") return MessageType::Terminate;
    throw ProtocolError("unknown message type '" + name + "'");
}

std::string Message::to_json() const {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["type"] = message_type_name(type);
    j["round"] = round;
    j["sender"] = sender;
    j["receiver"] = receiver;
    j["payload"] = payload;
    return j.dump();
}

Message Message::from_json(const std::string& text) {
    json j = json::parse(text);
    if (j.at("schema_version").get<int>() != kSchemaVersion) {
        throw ProtocolError("unsupported schema version");
    }
    Message m;
    m.type = message_type_from_name(j.at("type").get<std::string>());
    m.round = j.at("round").get<int>();
    m.sender = j.at("sender").get<std::string>();
    m.receiver = j.at("receiver").get<std::string>();
    m.payload = j.at("payload");
    return m;
}

namespace {

json encode_bin_stats(const BinStats& st) {
    json j;
    j["g"] = st.g;
    j["h"] = st.h;
    j["count"] = st.count;
    j["missing"] = json{{"g", st.g_missing}, {"h", st.h_missing}, {"count", st.count_missing}};
    return j;
}

BinStats decode_bin_stats(const json& j) {
    BinStats st;
    st.g = j.at("g").get<std::vector<double>>();
    st.h = j.at("h").get<std::vector<double>>();
    st.count = j.at("count").get<std::vector<std::int64_t>>();
    const auto& miss = j.at("missing");
    st.g_missing = miss.at("g").get<double>();
    st.h_missing = miss.at("h").get<double>();
    st.count_missing = miss.at("count").get<std::int64_t>();
    if (st.g.size() != st.h.size() || st.g.size() != st.count.size()) {
        throw ProtocolError("bin stat arrays have mismatched lengths");
    }
    return st;
}

}  // namespace

json encode_histogram(const SurrogateHistogram& hist) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["epsilon"] = hist.epsilon;
    j["sample_count"] = hist.sample_count;
    json feats = json::array();
    for (const auto& fh : hist.features) {
        json f;
        f["lo"] = fh.edges.lo;
        f["uppers"] = fh.edges.uppers;
        f["representative"] = fh.representatives;
        f["count"] = fh.counts;
        f["missing_count"] = fh.missing_count;
        f["sketch"] = json::parse(fh.sketch.to_json());
        feats.push_back(std::move(f));
    }
    j["features"] = std::move(feats);
    return j;
}

SurrogateHistogram decode_histogram(const json& j) {
    if (j.at("schema_version").get<int>() != kSchemaVersion) {
        throw ProtocolError("unsupported histogram schema version");
    }
    SurrogateHistogram hist;
    hist.epsilon = j.at("epsilon").get<double>();
    hist.sample_count = j.at("sample_count").get<std::size_t>();
    for (const auto& f : j.at("features")) {
        FeatureHistogram fh;
        fh.edges.lo = f.at("lo").get<double>();
        fh.edges.uppers = f.at("uppers").get<std::vector<double>>();
        fh.representatives = f.at("representative").get<std::vector<double>>();
        fh.counts = f.at("count").get<std::vector<std::int64_t>>();
        fh.missing_count = f.at("missing_count").get<std::int64_t>();
        fh.sketch = QuantileSketch::from_json(f.at("sketch").dump());
        if (fh.representatives.size() != fh.edges.uppers.size() ||
            fh.counts.size() != fh.edges.uppers.size()) {
            throw ProtocolError("histogram feature arrays have mismatched lengths");
        }
        hist.features.push_back(std::move(fh));
    }
    return hist;
}

json encode_gradient_payload(const GradientPayload& p) {
    json j;
    j["epsilon"] = p.epsilon;
    j["count"] = p.count;
    j["loss_sum"] = p.loss_sum;
    json feats = json::array();
    for (const auto& st : p.features) feats.push_back(encode_bin_stats(st));
    j["features"] = std::move(feats);
    j["grad"] = p.grad;
    j["hess"] = p.hess;
    if (p.structure) {
        j["structure"] = encode_histogram(*p.structure);
        json assign = json::array();
        for (std::uint32_t b : p.assignments) {
            assign.push_back(b == kMissingBin ? -1 : static_cast<std::int64_t>(b));
        }
        j["assignments"] = std::move(assign);
    }
    return j;
}

GradientPayload decode_gradient_payload(const json& j) {
    GradientPayload p;
    p.epsilon = j.at("epsilon").get<double>();
    p.count = j.at("count").get<std::int64_t>();
    p.loss_sum = j.at("loss_sum").get<double>();
    for (const auto& f : j.at("features")) p.features.push_back(decode_bin_stats(f));
    p.grad = j.at("grad").get<std::vector<double>>();
    p.hess = j.at("hess").get<std::vector<double>>();
    if (p.grad.size() != p.hess.size() || p.grad.size() != static_cast<std::size_t>(p.count)) {
        throw ProtocolError("per-sample gradient arrays do not match the reported count");
    }
    if (j.contains("structure")) {
        p.structure = decode_histogram(j.at("structure"));
        for (const auto& a : j.at("assignments")) {
            const auto v = a.get<std::int64_t>();
            p.assignments.push_back(v < 0 ? kMissingBin : static_cast<std::uint32_t>(v));
        }
        if (p.assignments.size() != p.grad.size() * p.structure->n_features()) {
            throw ProtocolError("bin assignment matrix does not match the reply shape");
        }
    }
    return p;
}

}  // namespace pax
