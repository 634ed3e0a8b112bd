#include "pax/fed.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "pax/error.hpp"
#include "pax/split.hpp"

namespace pax {

using nlohmann::json;

std::vector<double> compute_local_epsilon(double epsilon_global,
                                          std::span<const std::int64_t> sizes) {
    if (sizes.empty()) throw ConfigError("party roster is empty");
    if (!(epsilon_global > 0.0) || epsilon_global > 1.0) {
        throw ConfigError("epsilon_global must lie in (0,1]");
    }
    std::int64_t total = 0;
    for (std::int64_t s : sizes) {
        if (s < 1) throw ConfigError("every party must hold at least one sample");
        total += s;
    }
    std::vector<double> out;
    out.reserve(sizes.size());
    for (std::int64_t s : sizes) {
        out.push_back(epsilon_global * (static_cast<double>(s) / static_cast<double>(total)));
    }
    return out;
}

void SimTransport::send(const Message& m) {
    queues_[{m.receiver, m.sender}].push_back(m.to_json());
    ++sent_;
}

Message SimTransport::receive(const std::string& receiver, const std::string& sender) {
    auto it = queues_.find({receiver, sender});
    if (it == queues_.end() || it->second.empty()) {
        throw ProtocolError("no message from '" + sender + "' to '" + receiver + "'");
    }
    const std::string text = std::move(it->second.front());
    it->second.pop_front();
    return Message::from_json(text);
}

bool SimTransport::has_message(const std::string& receiver, const std::string& sender) const {
    const auto it = queues_.find({receiver, sender});
    return it != queues_.end() && !it->second.empty();
}

Party::Party(std::string id, Dataset data) : id_(std::move(id)), data_(std::move(data)) {
    data_.validate();
}

const SurrogateHistogram& Party::histogram() const {
    if (!initialized_) throw ProtocolError("party '" + id_ + "' has no epsilon assigned yet");
    return hist_;
}

void Party::pump(SimTransport& net, bool quantize_predict, ExecMode mode) {
    while (net.has_message(id_, kAggregatorId)) {
        const Message m = net.receive(id_, kAggregatorId);
        bool wants_reply = false;
        Message reply = handle(m, quantize_predict, mode, wants_reply);
        if (wants_reply) net.send(reply);
    }
}

Message Party::handle(const Message& m, bool quantize_predict, ExecMode mode, bool& wants_reply) {
    Message reply;
    reply.sender = id_;
    reply.receiver = kAggregatorId;
    reply.round = m.round;
    wants_reply = false;

    switch (m.type) {
        case MessageType::DataCountQuery: {
            reply.type = MessageType::DataCountReply;
            reply.payload = json{{"count", static_cast<std::int64_t>(data_.n_rows)}};
            wants_reply = true;
            return reply;
        }
        case MessageType::EpsilonAssign: {
            if (initialized_) throw ProtocolError("epsilon assigned twice to party '" + id_ + "'");
            epsilon_ = m.payload.at("epsilon").get<double>();
            hist_ = compute_histogram(data_, epsilon_, mode);
            assignments_ = assign_bins(hist_, data_, mode);
            initialized_ = true;
            return reply;
        }
        case MessageType::ModelBroadcast: {
            if (!initialized_) throw ProtocolError("model broadcast before epsilon assignment");
            model_ = Ensemble::from_json(m.payload.at("model").dump());
            const GradHessBuckets buckets =
                bucket_grad_hess(hist_, data_, assignments_, model_, quantize_predict, mode);

            GradientPayload p;
            p.epsilon = epsilon_;
            p.count = static_cast<std::int64_t>(data_.n_rows);
            p.loss_sum = buckets.loss_sum;
            p.features = buckets.features;
            p.grad = buckets.samples.grad;
            p.hess = buckets.samples.hess;
            if (!structure_sent_) {
                p.structure = hist_;
                p.assignments = assignments_;
                structure_sent_ = true;
            }
            reply.type = MessageType::GradientReply;
            reply.payload = encode_gradient_payload(p);
            wants_reply = true;
            return reply;
        }
        case MessageType::Terminate: {
            model_ = Ensemble::from_json(m.payload.at("model").dump());
            return reply;
        }
    }
    throw ProtocolError("party received unexpected message type");
}

std::string RoundTelemetry::to_json_line() const {
    json j;
    j["t"] = round;
    j["eps_m"] = eps_m;
    j["train_loss"] = train_loss;
    j["elapsed_ms"] = elapsed_ms;
    return j.dump();
}

Aggregator::Aggregator(TrainingConfig config, std::vector<std::string> roster)
    : config_(std::move(config)), roster_(std::move(roster)) {
    config_.validate();
    if (roster_.empty()) throw ConfigError("party roster is empty");
    model_.loss = config_.loss;
    model_.base_score = 0.0;
    model_.learning_rate = config_.learning_rate;
}

void Aggregator::setup(SimTransport& net, std::vector<Party>& parties, ExecMode mode) {
    if (parties.size() != roster_.size()) throw ConfigError("roster does not match party list");

    for (const auto& pid : roster_) {
        Message q;
        q.type = MessageType::DataCountQuery;
        q.sender = kAggregatorId;
        q.receiver = pid;
        q.payload = json::object();
        net.send(q);
    }
    for (auto& p : parties) p.pump(net, config_.quantize_predict, mode);
    sizes_.clear();
    for (const auto& pid : roster_) {
        const Message r = net.receive(kAggregatorId, pid);
        if (r.type != MessageType::DataCountReply) throw ProtocolError("expected a count reply");
        sizes_.push_back(r.payload.at("count").get<std::int64_t>());
    }

    epsilons_ = compute_local_epsilon(config_.epsilon_global, sizes_);
    total_count_ = 0;
    for (std::int64_t s : sizes_) total_count_ += s;

    for (std::size_t i = 0; i < roster_.size(); ++i) {
        Message a;
        a.type = MessageType::EpsilonAssign;
        a.sender = kAggregatorId;
        a.receiver = roster_[i];
        a.payload = json{{"epsilon", epsilons_[i]}};
        net.send(a);
    }
    for (auto& p : parties) p.pump(net, config_.quantize_predict, mode);

    party_hists_.assign(roster_.size(), SurrogateHistogram{});
    party_assignments_.assign(roster_.size(), {});
}

std::vector<GradientPayload> Aggregator::broadcast_and_collect(SimTransport& net,
                                                               std::vector<Party>& parties,
                                                               ExecMode mode) {
    for (const auto& pid : roster_) {
        Message b;
        b.type = MessageType::ModelBroadcast;
        b.sender = kAggregatorId;
        b.receiver = pid;
        b.round = round_;
        b.payload = json{{"model", json::parse(model_.to_json())}};
        net.send(b);
    }
    for (auto& p : parties) p.pump(net, config_.quantize_predict, mode);

    std::vector<GradientPayload> replies;
    replies.reserve(roster_.size());
    for (std::size_t i = 0; i < roster_.size(); ++i) {
        const Message r = net.receive(kAggregatorId, roster_[i]);
        if (r.type != MessageType::GradientReply) throw ProtocolError("expected a gradient reply");
        if (r.round != round_) {
            throw ProtocolError("gradient reply for round " + std::to_string(r.round) +
                                " does not match broadcast round " + std::to_string(round_));
        }
        if (net.has_message(kAggregatorId, roster_[i])) {
            throw ProtocolError("party '" + roster_[i] + "' sent more than one reply this round");
        }
        GradientPayload p = decode_gradient_payload(r.payload);
        if (p.count != sizes_[i]) throw ProtocolError("reply count changed mid-training");
        if (p.structure) {
            party_hists_[i] = std::move(*p.structure);
            party_assignments_[i] = std::move(p.assignments);
            p.structure.reset();
            p.assignments.clear();
        }
        if (party_hists_[i].n_features() == 0) {
            throw ProtocolError("party '" + roster_[i] + "' never sent its histogram structure");
        }
        replies.push_back(std::move(p));
    }
    return replies;
}

double Aggregator::fold_loss(std::span<const GradientPayload> replies) {
    double loss_sum = 0.0;
    for (const auto& r : replies) loss_sum += r.loss_sum;
    const double mean = loss_sum / static_cast<double>(total_count_);
    if (!telemetry_.empty() && std::isnan(telemetry_.back().train_loss)) {
        telemetry_.back().train_loss = mean;
    }
    return mean;
}

double Aggregator::run_round(SimTransport& net, std::vector<Party>& parties, ExecMode mode) {
    if (round_ >= config_.max_rounds) throw ProtocolError("training already ran max_rounds");
    const auto t0 = std::chrono::steady_clock::now();

    const std::vector<GradientPayload> replies = broadcast_and_collect(net, parties, mode);
    const double broadcast_loss = fold_loss(replies);

    std::vector<GradHessBuckets> buckets;
    buckets.reserve(replies.size());
    for (std::size_t i = 0; i < replies.size(); ++i) {
        GradHessBuckets b;
        b.provenance = roster_[i];
        for (const auto& fh : party_hists_[i].features) b.edges.push_back(fh.edges);
        b.features = replies[i].features;
        b.samples.n_rows = static_cast<std::size_t>(replies[i].count);
        b.samples.n_cols = party_hists_[i].n_features();
        b.samples.bin = party_assignments_[i];
        b.samples.grad = replies[i].grad;
        b.samples.hess = replies[i].hess;
        b.loss_sum = replies[i].loss_sum;
        buckets.push_back(std::move(b));
    }

    const double eps_m = select_merge_epsilon(epsilons_, config_.loss);
    auto [merged_hist, merged] = merge_hist(buckets, party_hists_, eps_m, mode);

    Tree tree = grow_tree(merged, config_, mode);
    model_.trees.push_back(std::move(tree));
    ++round_;

    const auto t1 = std::chrono::steady_clock::now();
    RoundTelemetry row;
    row.round = round_;
    row.eps_m = eps_m;
    row.train_loss = std::numeric_limits<double>::quiet_NaN();  // next broadcast fills it
    row.elapsed_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    telemetry_.push_back(row);
    return broadcast_loss;
}

double Aggregator::evaluate_loss(SimTransport& net, std::vector<Party>& parties, ExecMode mode) {
    const std::vector<GradientPayload> replies = broadcast_and_collect(net, parties, mode);
    return fold_loss(replies);
}

void Aggregator::terminate(SimTransport& net, std::vector<Party>& parties, ExecMode mode) {
    for (const auto& pid : roster_) {
        Message t;
        t.type = MessageType::Terminate;
        t.sender = kAggregatorId;
        t.receiver = pid;
        t.round = round_;
        t.payload = json{{"model", json::parse(model_.to_json())}};
        net.send(t);
    }
    for (auto& p : parties) p.pump(net, config_.quantize_predict, mode);
}

TrainingResult run_training(const TrainingConfig& config, std::vector<Party>& parties,
                            const TrainingOptions& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    config.validate();
    if (parties.empty()) throw ConfigError("at least one party is required");

    std::vector<std::string> roster;
    roster.reserve(parties.size());
    for (const auto& p : parties) roster.push_back(p.id());

    SimTransport net;
    Aggregator agg(config, roster);
    agg.setup(net, parties, opts.mode);

    TrainingResult result;
    result.party_epsilons.assign(agg.epsilons().begin(), agg.epsilons().end());

    // The loss of the model broadcast in round t becomes known with that
    // round's replies, so each round closes out the previous row and the
    // final evaluation pass closes out the last one.
    double prev_loss = std::numeric_limits<double>::quiet_NaN();
    int stall = 0;
    for (int t = 0; t < config.max_rounds; ++t) {
        if (config.early_stop && stall >= config.early_stop_patience) break;
        const double observed = agg.run_round(net, parties, opts.mode);
        if (t == 0) {
            result.initial_loss = observed;
        } else if (prev_loss - observed < config.early_stop_tol) {
            ++stall;
        } else {
            stall = 0;
        }
        prev_loss = observed;
    }
    const double final_loss = agg.evaluate_loss(net, parties, opts.mode);
    if (config.max_rounds == 0) result.initial_loss = final_loss;
    agg.terminate(net, parties, opts.mode);

    result.model = agg.model();
    result.telemetry.assign(agg.telemetry().begin(), agg.telemetry().end());
    result.rounds_run = agg.round();
    if (opts.telemetry_sink) {
        for (const auto& row : result.telemetry) {
            *opts.telemetry_sink << row.to_json_line() << '\n';
        }
    }
    const auto t1 = std::chrono::steady_clock::now();
    result.total_wall_seconds = std::chrono::duration<double>(t1 - t0).count();
    return result;
}

}  // namespace pax
