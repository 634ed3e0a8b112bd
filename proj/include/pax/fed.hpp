#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "pax/config.hpp"
#include "pax/dataset.hpp"
#include "pax/exec.hpp"
#include "pax/histogram.hpp"
#include "pax/wire.hpp"

namespace pax {

// Party-adaptive rank-error budgets: eps_i = eps_global * size_i / sum(sizes).
// The budgets sum back to eps_global; larger parties get looser budgets and
// therefore coarser histograms. Zero-size parties are rejected.
std::vector<double> compute_local_epsilon(double epsilon_global,
                                          std::span<const std::int64_t> sizes);

// In-process transport with FIFO ordering per (sender, receiver) pair.
// Every message is serialized on send and parsed on receive so the wire
// format is exercised even though no socket exists.
class SimTransport {
public:
    void send(const Message& m);
    Message receive(const std::string& receiver, const std::string& sender);
    bool has_message(const std::string& receiver, const std::string& sender) const;
    std::size_t messages_sent() const { return sent_; }

private:
    std::map<std::pair<std::string, std::string>, std::deque<std::string>> queues_;
    std::size_t sent_ = 0;
};

// A data-holding participant. The raw dataset never leaves this object:
// outbound traffic is limited to its sample count, the surrogate histogram,
// and per-round gradient statistics.
class Party {
public:
    Party(std::string id, Dataset data);

    const std::string& id() const { return id_; }
    bool initialized() const { return initialized_; }
    double epsilon() const { return epsilon_; }
    const SurrogateHistogram& histogram() const;
    const Ensemble& local_model() const { return model_; }

    // Drains the aggregator's queue, handling each message in order and
    // sending any replies back through the transport.
    void pump(SimTransport& net, bool quantize_predict, ExecMode mode);

private:
    Message handle(const Message& m, bool quantize_predict, ExecMode mode, bool& wants_reply);

    std::string id_;
    Dataset data_;
    double epsilon_ = 0.0;
    bool initialized_ = false;
    SurrogateHistogram hist_;
    std::vector<std::uint32_t> assignments_;
    Ensemble model_;  // local copy of the latest broadcast
    bool structure_sent_ = false;
};

struct RoundTelemetry {
    int round = 0;          // 1-based; the round that appended tree #round
    double eps_m = 0.0;     // fusion resolution chosen for the round
    double train_loss = 0;  // mean training loss after the round's tree
    double elapsed_ms = 0;

    std::string to_json_line() const;
};

struct TrainingResult {
    Ensemble model;
    std::vector<double> party_epsilons;
    double initial_loss = 0.0;  // mean loss of the null model
    std::vector<RoundTelemetry> telemetry;
    double total_wall_seconds = 0.0;
    int rounds_run = 0;
};

// Aggregator state machine: owns the global model, the roster bookkeeping,
// and the per-round fuse-and-grow step. Parties are reached only through
// the transport.
class Aggregator {
public:
    Aggregator(TrainingConfig config, std::vector<std::string> roster);

    // Setup (Algorithm lines 1-8): query counts, derive and assign each
    // party's epsilon. Parties build their histograms on assignment.
    void setup(SimTransport& net, std::vector<Party>& parties, ExecMode mode);

    // One training round: broadcast the current model, collect one gradient
    // reply per party, fuse at the merge epsilon, grow one tree. Returns the
    // mean training loss of the model that was broadcast.
    double run_round(SimTransport& net, std::vector<Party>& parties, ExecMode mode);

    // Evaluation-only broadcast: collects losses without growing a tree.
    double evaluate_loss(SimTransport& net, std::vector<Party>& parties, ExecMode mode);

    // Broadcasts the final model to every party.
    void terminate(SimTransport& net, std::vector<Party>& parties, ExecMode mode);

    int round() const { return round_; }
    const Ensemble& model() const { return model_; }
    const TrainingConfig& config() const { return config_; }
    std::span<const double> epsilons() const { return epsilons_; }
    std::span<const RoundTelemetry> telemetry() const { return telemetry_; }

private:
    std::vector<GradientPayload> broadcast_and_collect(SimTransport& net,
                                                       std::vector<Party>& parties, ExecMode mode);
    double fold_loss(std::span<const GradientPayload> replies);

    TrainingConfig config_;
    std::vector<std::string> roster_;
    Ensemble model_;
    int round_ = 0;
    std::vector<std::int64_t> sizes_;
    std::vector<double> epsilons_;
    std::int64_t total_count_ = 0;
    // Round-0 structures cached so later rounds only carry statistics.
    std::vector<SurrogateHistogram> party_hists_;
    std::vector<std::vector<std::uint32_t>> party_assignments_;
    std::vector<RoundTelemetry> telemetry_;
};

struct TrainingOptions {
    ExecMode mode = ExecMode::Parallel;
    std::ostream* telemetry_sink = nullptr;  // JSONL, one line per round
};

// Runs the whole protocol: setup, max_rounds fuse-and-grow rounds (subject
// to optional early stopping), a final evaluation pass, and termination.
TrainingResult run_training(const TrainingConfig& config, std::vector<Party>& parties,
                            const TrainingOptions& opts = {});

}  // namespace pax
