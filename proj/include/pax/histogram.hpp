#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pax/dataset.hpp"
#include "pax/exec.hpp"
#include "pax/loss.hpp"
#include "pax/sketch.hpp"
#include "pax/tree.hpp"

namespace pax {

// Bin layout of one feature. Bin 0 covers [lo, uppers[0]]; bin j > 0 covers
// (uppers[j-1], uppers[j]]. A single boundary (lo == uppers[0]) is the
// degenerate constant-column interval [v, v].
struct BinEdges {
    double lo = 0.0;
    std::vector<double> uppers;

    int n_bins() const { return static_cast<int>(uppers.size()); }
    double lower_of(int bin) const { return bin == 0 ? lo : uppers[static_cast<std::size_t>(bin) - 1]; }
    double upper_of(int bin) const { return uppers[static_cast<std::size_t>(bin)]; }

    // First bin whose upper edge is >= v; values beyond the fences clamp to
    // the outermost bins.
    int bin_of(double v) const;

    // Midpoint of the bin interval; the single value for degenerate bins.
    double representative(int bin) const;
};

// Quantile boundaries for one feature: interior quantiles at k/n_bins plus
// the min/max fences, deduplicated. When the sketch still holds every
// distinct inserted value and there are at most n_bins of them, each value
// gets its own bin instead, which makes the histogram representation exact.
BinEdges extract_bins(const QuantileSketch& sketch, int n_bins);

// One feature of a party's surrogate histogram.
struct FeatureHistogram {
    BinEdges edges;
    std::vector<double> representatives;  // one per bin
    std::vector<std::int64_t> counts;     // one per bin
    std::int64_t missing_count = 0;
    QuantileSketch sketch;
};

// The data-derived artifact a party shares instead of raw samples: an
// eps-resolution quantile binning of each feature.
struct SurrogateHistogram {
    double epsilon = 0.0;
    std::size_t sample_count = 0;
    std::vector<FeatureHistogram> features;

    std::size_t n_features() const { return features.size(); }
};

// Per-feature, per-bin summed gradient statistics.
struct BinStats {
    std::vector<double> g;
    std::vector<double> h;
    std::vector<std::int64_t> count;
    double g_missing = 0.0;
    double h_missing = 0.0;
    std::int64_t count_missing = 0;

    void resize(std::size_t bins) {
        g.assign(bins, 0.0);
        h.assign(bins, 0.0);
        count.assign(bins, 0);
    }
};

// Bin index marking a missing cell in a sample view.
inline constexpr std::uint32_t kMissingBin = 0xFFFFFFFFu;

// Row-level view of bucketed samples: the bin index of every cell plus the
// per-sample gradient pair. This is what lets the tree grower partition a
// node's mass exactly, feature by feature, without ever seeing raw values.
struct SampleStats {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<std::uint32_t> bin;  // row-major, kMissingBin for missing
    std::vector<double> grad;
    std::vector<double> hess;

    std::uint32_t bin_at(std::size_t r, std::size_t c) const { return bin[r * n_cols + c]; }
};

struct GradHessBuckets {
    std::string provenance;          // party id or "merged"
    std::vector<BinEdges> edges;     // bin schema, one per feature
    std::vector<BinStats> features;  // per-bin sums, one per feature
    SampleStats samples;
    double loss_sum = 0.0;  // training loss of the model that produced g/h

    std::size_t n_features() const { return features.size(); }
};

// Builds the per-feature quantile sketches and bins for a party's data.
// n_bins per feature is max(1, floor(1/epsilon_i)) capped at the feature's
// distinct-value count.
SurrogateHistogram compute_histogram(const Dataset& data, double epsilon_i,
                                     ExecMode mode = ExecMode::Parallel);

// Round-invariant bin index of every cell (row-major).
std::vector<std::uint32_t> assign_bins(const SurrogateHistogram& hist, const Dataset& data,
                                       ExecMode mode = ExecMode::Parallel);

// Predicts with the model (on bin representatives when quantize_predict,
// else on raw values), derives per-sample g/h, and accumulates them into
// hist's bins. Missing cells land in the per-feature missing bucket.
GradHessBuckets bucket_grad_hess(const SurrogateHistogram& hist, const Dataset& data,
                                 const Ensemble& model, bool quantize_predict = true,
                                 ExecMode mode = ExecMode::Parallel);

// Same, reusing a precomputed assign_bins result.
GradHessBuckets bucket_grad_hess(const SurrogateHistogram& hist, const Dataset& data,
                                 std::span<const std::uint32_t> assignments, const Ensemble& model,
                                 bool quantize_predict = true, ExecMode mode = ExecMode::Parallel);

// Fusion resolution: finest party budget (min) for classification, coarsest
// (max) for regression.
double select_merge_epsilon(std::span<const double> party_epsilons, LossKind loss);

// Re-aligns all party histograms onto the epsilon_m global binning. Each
// party bin's (G, H, count) mass moves wholly into the merged bin that
// contains its representative; per-sample views are remapped by the same
// rule and concatenated in roster order. Totals are conserved.
std::pair<SurrogateHistogram, GradHessBuckets> merge_hist(
    std::span<const GradHessBuckets> party_buckets,
    std::span<const SurrogateHistogram> party_hists, double epsilon_m,
    ExecMode mode = ExecMode::Parallel);

}  // namespace pax
