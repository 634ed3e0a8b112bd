#include "pax/sketch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "pax/error.hpp"

namespace pax {

using nlohmann::json;

namespace {
constexpr std::size_t kHeadCapacity = 1024;
}

QuantileSketch::QuantileSketch(double epsilon) : epsilon_(epsilon) {
    if (!(epsilon > 0.0) || epsilon > 1.0) {
        throw ConfigError("sketch epsilon must lie in (0,1]");
    }
    head_.reserve(kHeadCapacity);
}

void QuantileSketch::insert(double value) {
    if (!std::isfinite(value)) throw Error("cannot insert non-finite value into sketch");
    head_.push_back(value);
    if (head_.size() >= kHeadCapacity) {
        flush_head();
        maybe_compress();
    }
}

void QuantileSketch::seal() {
    flush_head();
    maybe_compress();
}

std::size_t QuantileSketch::entry_budget() const {
    return std::max<std::size_t>(4096, static_cast<std::size_t>(std::ceil(2.0 / epsilon_)));
}

void QuantileSketch::flush_head() const {
    if (head_.empty()) return;
    std::sort(head_.begin(), head_.end());

    std::vector<Entry> merged;
    merged.reserve(entries_.size() + head_.size());

    std::size_t ei = 0;
    std::int64_t running = count_;
    for (std::size_t hi = 0; hi < head_.size(); ++hi) {
        const double v = head_[hi];
        while (ei < entries_.size() && entries_[ei].value <= v) {
            merged.push_back(entries_[ei]);
            ++ei;
        }
        ++running;
        // New items absorb the current rank uncertainty unless they land at
        // the extremes, which stay exact.
        std::int64_t delta;
        if (merged.empty() || (ei == entries_.size() && hi + 1 == head_.size())) {
            delta = 0;
        } else {
            delta = static_cast<std::int64_t>(std::floor(2.0 * epsilon_ * static_cast<double>(running)));
        }
        merged.push_back(Entry{v, 1, delta});
    }
    for (; ei < entries_.size(); ++ei) merged.push_back(entries_[ei]);

    entries_ = std::move(merged);
    count_ = running;
    head_.clear();
}

void QuantileSketch::maybe_compress() const {
    if (entries_.size() > entry_budget()) {
        compress(2.0 * epsilon_ * static_cast<double>(count_));
    }
}

void QuantileSketch::compress(double threshold) const {
    if (entries_.size() <= 2) return;

    std::vector<Entry> kept;
    kept.reserve(entries_.size());

    Entry head = entries_.back();
    for (std::size_t i = entries_.size() - 1; i-- > 1;) {
        const Entry& cur = entries_[i];
        if (static_cast<double>(cur.g + head.g + head.delta) < threshold) {
            if (cur.value != head.value) lossless_ = false;
            head.g += cur.g;
        } else {
            kept.push_back(head);
            head = cur;
        }
    }
    kept.push_back(head);
    kept.push_back(entries_.front());
    std::reverse(kept.begin(), kept.end());
    entries_ = std::move(kept);
}

const std::vector<QuantileSketch::Entry>& QuantileSketch::entries() const {
    flush_head();
    return entries_;
}

double QuantileSketch::min_value() const {
    if (empty()) throw Error("empty sketch has no minimum");
    flush_head();
    return entries_.front().value;
}

double QuantileSketch::max_value() const {
    if (empty()) throw Error("empty sketch has no maximum");
    flush_head();
    return entries_.back().value;
}

bool QuantileSketch::lossless() const { return lossless_; }

std::vector<double> QuantileSketch::distinct_values() const {
    flush_head();
    std::vector<double> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) {
        if (out.empty() || out.back() != e.value) out.push_back(e.value);
    }
    return out;
}

double QuantileSketch::query(double phi) const {
    if (empty()) throw Error("cannot query an empty sketch");
    if (phi < 0.0 || phi > 1.0) throw Error("quantile must lie in [0,1]");
    flush_head();

    if (phi <= epsilon_) return entries_.front().value;
    if (phi >= 1.0 - epsilon_) return entries_.back().value;

    std::int64_t max_span = 0;
    for (const auto& e : entries_) max_span = std::max(max_span, e.g + e.delta);
    const double tolerance = static_cast<double>(max_span) / 2.0;

    const double target = std::ceil(phi * static_cast<double>(count_));
    std::int64_t min_rank = 0;
    for (std::size_t i = 0; i + 1 < entries_.size(); ++i) {
        min_rank += entries_[i].g;
        const double lo = static_cast<double>(min_rank + entries_[i].delta) - tolerance;
        const double hi = static_cast<double>(min_rank) + tolerance;
        if (lo <= target && target <= hi) return entries_[i].value;
    }
    return entries_.back().value;
}

void QuantileSketch::merge(const QuantileSketch& other) {
    other.flush_head();
    flush_head();
    if (other.entries_.empty()) return;
    if (entries_.empty()) {
        entries_ = other.entries_;
        count_ = other.count_;
        epsilon_ = std::max(epsilon_, other.epsilon_);
        lossless_ = other.lossless_;
        return;
    }

    const auto& a = entries_;
    const auto& b = other.entries_;

    // Slack for an entry is the rank uncertainty of the first strictly
    // greater entry on the other side; entries beyond the other side's range
    // interleave exactly and get none.
    auto foreign_slack = [](const std::vector<Entry>& side, std::size_t from, double value) {
        for (std::size_t i = from; i < side.size(); ++i) {
            if (side[i].value > value) return side[i].g + side[i].delta - 1;
        }
        return std::int64_t{0};
    };

    std::vector<Entry> merged;
    merged.reserve(a.size() + b.size());
    std::size_t ia = 0;
    std::size_t ib = 0;
    while (ia < a.size() || ib < b.size()) {
        Entry e;
        std::int64_t slack = 0;
        if (ib == b.size() || (ia < a.size() && a[ia].value <= b[ib].value)) {
            e = a[ia];
            slack = foreign_slack(b, ib, e.value);
            ++ia;
        } else {
            e = b[ib];
            slack = foreign_slack(a, ia, e.value);
            ++ib;
        }
        e.delta += slack;
        merged.push_back(e);
    }

    entries_ = std::move(merged);
    count_ += other.count_;
    epsilon_ = std::max(epsilon_, other.epsilon_);
    lossless_ = lossless_ && other.lossless_;
    maybe_compress();
}

QuantileSketch QuantileSketch::merged(std::span<const QuantileSketch> sketches) {
    QuantileSketch acc;
    bool any = false;
    double eps = 0.0;
    for (const auto& sk : sketches) {
        if (!sk.empty()) {
            any = true;
            eps = std::max(eps, sk.epsilon());
        }
    }
    if (!any) throw Error("cannot merge: all sketches are empty");
    acc.epsilon_ = eps;
    for (const auto& sk : sketches) {
        if (!sk.empty()) acc.merge(sk);
    }
    return acc;
}

std::string QuantileSketch::to_json() const {
    flush_head();
    json j;
    j["epsilon"] = epsilon_;
    j["count"] = count_;
    j["lossless"] = lossless_;
    json ents = json::array();
    for (const auto& e : entries_) ents.push_back(json::array({e.value, e.g, e.delta}));
    j["entries"] = std::move(ents);
    return j.dump();
}

QuantileSketch QuantileSketch::from_json(const std::string& text) {
    json j = json::parse(text);
    QuantileSketch sk(j.at("epsilon").get<double>());
    sk.count_ = j.at("count").get<std::int64_t>();
    sk.lossless_ = j.at("lossless").get<bool>();
    for (const auto& ej : j.at("entries")) {
        sk.entries_.push_back(Entry{ej.at(0).get<double>(), ej.at(1).get<std::int64_t>(),
                                    ej.at(2).get<std::int64_t>()});
    }
    std::int64_t total = 0;
    for (const auto& e : sk.entries_) total += e.g;
    if (total != sk.count_) throw ProtocolError("sketch entry weights do not sum to count");
    return sk;
}

}  // namespace pax
