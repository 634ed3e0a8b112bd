#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pax {

// Greenwald-Khanna rank summary over one feature column.
//
// Entries are (value, g, delta) triples in value order: g is the minimum
// rank gap to the previous entry and delta the extra slack on the maximum
// rank, so entry i covers true ranks [sum(g_0..g_i), sum(g_0..g_i)+delta_i].
// Inserts buffer into a head batch; flushing sorts the batch into the entry
// list and compresses once the list outgrows its budget. The compression
// bound 2*epsilon*count keeps every (g + delta) small enough that any
// quantile query lands within epsilon*count ranks of the truth.
//
// Merging interleaves two entry lists and widens each entry's delta by the
// local uncertainty of the other side (g + delta of the next foreign entry,
// minus one). The combined bound is 2*max(eps_a, eps_b)*(n_a + n_b), i.e.
// the merged query error stays within (max input epsilon + merge slack of
// one epsilon) times the merged count; merging identical or range-disjoint
// inputs adds no slack at all.
//
// Construction is single-writer. A sealed sketch is immutable and safe to
// read or merge from many threads.
class QuantileSketch {
public:
    struct Entry {
        double value = 0.0;
        std::int64_t g = 0;
        std::int64_t delta = 0;
    };

    QuantileSketch() = default;
    explicit QuantileSketch(double epsilon);

    // Throws Error on non-finite input (missing values never enter a sketch).
    void insert(double value);

    // Flushes pending inserts; afterwards the sketch is safe for concurrent
    // reads. Query/merge/serialize seal on demand.
    void seal();

    std::int64_t count() const { return count_ + static_cast<std::int64_t>(head_.size()); }
    bool empty() const { return count() == 0; }
    double epsilon() const { return epsilon_; }

    // Approximate phi-quantile; the returned value's true rank is within
    // epsilon*count of phi*count. Throws Error on an empty sketch.
    double query(double phi) const;

    double min_value() const;
    double max_value() const;

    // True while no compression has dropped a distinct value, in which case
    // distinct_values() is exactly the set of inserted values.
    bool lossless() const;
    std::vector<double> distinct_values() const;

    void merge(const QuantileSketch& other);
    static QuantileSketch merged(std::span<const QuantileSketch> sketches);

    const std::vector<Entry>& entries() const;

    std::string to_json() const;
    static QuantileSketch from_json(const std::string& text);

private:
    void flush_head() const;
    void compress(double threshold) const;
    void maybe_compress() const;
    std::size_t entry_budget() const;

    double epsilon_ = 0.01;
    // Logically-const maintenance: flushing/compressing changes the
    // representation, not the summarized distribution.
    mutable std::vector<Entry> entries_;
    mutable std::vector<double> head_;
    mutable std::int64_t count_ = 0;
    mutable bool lossless_ = true;
};

}  // namespace pax
