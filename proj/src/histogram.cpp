#include "pax/histogram.hpp"

#include <algorithm>
#include <cmath>

#include "pax/config.hpp"
#include "pax/error.hpp"

namespace pax {

int BinEdges::bin_of(double v) const {
    if (uppers.empty()) throw Error("bin layout has no bins");
    const auto it = std::lower_bound(uppers.begin(), uppers.end(), v);
    if (it == uppers.end()) return n_bins() - 1;
    return static_cast<int>(it - uppers.begin());
}

double BinEdges::representative(int bin) const {
    const double lo_v = lower_of(bin);
    const double hi_v = upper_of(bin);
    if (lo_v == hi_v) return hi_v;
    return 0.5 * (lo_v + hi_v);
}

BinEdges extract_bins(const QuantileSketch& sketch, int n_bins) {
    if (sketch.empty()) throw Error("cannot extract bins from an empty sketch");
    if (n_bins < 1) throw Error("bin count must be >= 1");

    BinEdges edges;
    const auto distinct = sketch.distinct_values();
    if (sketch.lossless() && static_cast<int>(distinct.size()) <= n_bins) {
        // One bin per distinct value: bin 0 degenerates to [v0, v0] and bin
        // j > 0 covers (v_{j-1}, v_j].
        edges.lo = distinct.front();
        edges.uppers = distinct;
        return edges;
    }

    edges.lo = sketch.min_value();
    edges.uppers.reserve(static_cast<std::size_t>(n_bins));
    for (int k = 1; k < n_bins; ++k) {
        edges.uppers.push_back(sketch.query(static_cast<double>(k) / static_cast<double>(n_bins)));
    }
    edges.uppers.push_back(sketch.max_value());
    std::sort(edges.uppers.begin(), edges.uppers.end());
    edges.uppers.erase(std::unique(edges.uppers.begin(), edges.uppers.end()), edges.uppers.end());
    return edges;
}

namespace {

FeatureHistogram build_feature(const Dataset& data, std::size_t col, double epsilon_i) {
    FeatureHistogram fh;
    fh.sketch = QuantileSketch(epsilon_i);

    std::vector<double> present;
    present.reserve(data.n_rows);
    for (std::size_t r = 0; r < data.n_rows; ++r) {
        const double v = data.at(r, col);
        if (is_missing(v)) {
            ++fh.missing_count;
        } else {
            fh.sketch.insert(v);
            present.push_back(v);
        }
    }
    fh.sketch.seal();

    if (present.empty()) {
        // A fully-missing column: keep a placeholder bin so schemas stay
        // rectangular; it never receives mass.
        fh.edges.lo = 0.0;
        fh.edges.uppers = {0.0};
        fh.representatives = {0.0};
        fh.counts = {0};
        return fh;
    }

    const int n_bins = bins_for_epsilon(epsilon_i);
    std::vector<double> distinct(present);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    if (static_cast<int>(distinct.size()) <= n_bins) {
        fh.edges.lo = distinct.front();
        fh.edges.uppers = std::move(distinct);
    } else {
        fh.edges = extract_bins(fh.sketch, n_bins);
    }

    const std::size_t bins = static_cast<std::size_t>(fh.edges.n_bins());
    fh.representatives.resize(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        fh.representatives[b] = fh.edges.representative(static_cast<int>(b));
    }
    fh.counts.assign(bins, 0);
    for (double v : present) {
        ++fh.counts[static_cast<std::size_t>(fh.edges.bin_of(v))];
    }
    return fh;
}

}  // namespace

SurrogateHistogram compute_histogram(const Dataset& data, double epsilon_i, ExecMode mode) {
    data.validate();
    if (!(epsilon_i > 0.0) || epsilon_i > 1.0) {
        throw ConfigError("party epsilon must lie in (0,1]");
    }

    SurrogateHistogram hist;
    hist.epsilon = epsilon_i;
    hist.sample_count = data.n_rows;
    hist.features.resize(data.n_cols);
    parallel_for(data.n_cols, mode,
                 [&](std::size_t c) { hist.features[c] = build_feature(data, c, epsilon_i); });
    return hist;
}

std::vector<std::uint32_t> assign_bins(const SurrogateHistogram& hist, const Dataset& data,
                                       ExecMode mode) {
    if (hist.n_features() != data.n_cols) {
        throw DimensionError("histogram has " + std::to_string(hist.n_features()) +
                             " features, data has " + std::to_string(data.n_cols));
    }
    std::vector<std::uint32_t> out(data.n_rows * data.n_cols);
    parallel_for(data.n_cols, mode, [&](std::size_t c) {
        const BinEdges& edges = hist.features[c].edges;
        for (std::size_t r = 0; r < data.n_rows; ++r) {
            const double v = data.at(r, c);
            out[r * data.n_cols + c] =
                is_missing(v) ? kMissingBin : static_cast<std::uint32_t>(edges.bin_of(v));
        }
    });
    return out;
}

GradHessBuckets bucket_grad_hess(const SurrogateHistogram& hist, const Dataset& data,
                                 const Ensemble& model, bool quantize_predict, ExecMode mode) {
    const auto assignments = assign_bins(hist, data, mode);
    return bucket_grad_hess(hist, data, assignments, model, quantize_predict, mode);
}

GradHessBuckets bucket_grad_hess(const SurrogateHistogram& hist, const Dataset& data,
                                 std::span<const std::uint32_t> assignments, const Ensemble& model,
                                 bool quantize_predict, ExecMode mode) {
    data.validate();
    if (hist.n_features() != data.n_cols || hist.sample_count != data.n_rows) {
        throw DimensionError("histogram was not built from this dataset shape");
    }
    if (assignments.size() != data.n_rows * data.n_cols) {
        throw DimensionError("bin assignment matrix shape mismatch");
    }

    GradHessBuckets out;
    out.edges.reserve(hist.n_features());
    for (const auto& fh : hist.features) out.edges.push_back(fh.edges);

    auto& s = out.samples;
    s.n_rows = data.n_rows;
    s.n_cols = data.n_cols;
    s.bin.assign(assignments.begin(), assignments.end());
    s.grad.resize(data.n_rows);
    s.hess.resize(data.n_rows);

    // Per-sample predictions and derivatives; rows are independent.
    parallel_for(data.n_rows, mode, [&](std::size_t r) {
        double y_hat;
        if (quantize_predict) {
            std::vector<double> q(data.n_cols);
            for (std::size_t c = 0; c < data.n_cols; ++c) {
                const std::uint32_t b = s.bin_at(r, c);
                q[c] = b == kMissingBin ? kMissing : hist.features[c].representatives[b];
            }
            y_hat = model.predict(q);
        } else {
            y_hat = model.predict(data.row(r));
        }
        const auto gh = grad_hess(model.loss, data.y[r], y_hat);
        s.grad[r] = gh.g;
        s.hess[r] = gh.h;
    });

    out.loss_sum = chunked_sum(data.n_rows, mode, [&](std::size_t r) {
        double y_hat;
        if (quantize_predict) {
            std::vector<double> q(data.n_cols);
            for (std::size_t c = 0; c < data.n_cols; ++c) {
                const std::uint32_t b = s.bin_at(r, c);
                q[c] = b == kMissingBin ? kMissing : hist.features[c].representatives[b];
            }
            y_hat = model.predict(q);
        } else {
            y_hat = model.predict(data.row(r));
        }
        return loss_value(model.loss, data.y[r], y_hat);
    });

    // Accumulate per-feature bins in row order so results are independent of
    // the thread count.
    out.features.resize(data.n_cols);
    parallel_for(data.n_cols, mode, [&](std::size_t c) {
        BinStats& stats = out.features[c];
        stats.resize(static_cast<std::size_t>(hist.features[c].edges.n_bins()));
        for (std::size_t r = 0; r < data.n_rows; ++r) {
            const std::uint32_t b = s.bin_at(r, c);
            if (b == kMissingBin) {
                stats.g_missing += s.grad[r];
                stats.h_missing += s.hess[r];
                ++stats.count_missing;
            } else {
                stats.g[b] += s.grad[r];
                stats.h[b] += s.hess[r];
                ++stats.count[b];
            }
        }
    });
    return out;
}

double select_merge_epsilon(std::span<const double> party_epsilons, LossKind loss) {
    if (party_epsilons.empty()) throw ProtocolError("no party epsilons to merge");
    for (double e : party_epsilons) {
        if (!(e > 0.0) || e > 1.0) throw ProtocolError("party epsilon out of range (0,1]");
    }
    if (is_classification(loss)) {
        return *std::min_element(party_epsilons.begin(), party_epsilons.end());
    }
    return *std::max_element(party_epsilons.begin(), party_epsilons.end());
}

std::pair<SurrogateHistogram, GradHessBuckets> merge_hist(
    std::span<const GradHessBuckets> party_buckets, std::span<const SurrogateHistogram> party_hists,
    double epsilon_m, ExecMode mode) {
    if (party_buckets.empty() || party_buckets.size() != party_hists.size()) {
        throw ProtocolError("merge needs one bucket set per party histogram");
    }
    if (!(epsilon_m > 0.0) || epsilon_m > 1.0) throw ProtocolError("merge epsilon out of range");

    const std::size_t m = party_hists.front().n_features();
    for (std::size_t p = 0; p < party_hists.size(); ++p) {
        if (party_hists[p].n_features() != m || party_buckets[p].n_features() != m) {
            throw ProtocolError("party feature schemas do not match");
        }
        if (party_buckets[p].samples.n_rows != party_hists[p].sample_count) {
            throw ProtocolError("party bucket sample view does not match its histogram");
        }
    }

    const int n_bins_m = bins_for_epsilon(epsilon_m);

    SurrogateHistogram merged_hist;
    merged_hist.epsilon = epsilon_m;
    merged_hist.features.resize(m);

    GradHessBuckets merged;
    merged.provenance = "merged";
    merged.edges.resize(m);
    merged.features.resize(m);

    // party -> per-feature map from party bin to merged bin
    std::vector<std::vector<std::vector<std::uint32_t>>> remap(party_hists.size());
    for (auto& r : remap) r.resize(m);

    parallel_for(m, mode, [&](std::size_t c) {
        std::vector<QuantileSketch> sketches;
        sketches.reserve(party_hists.size());
        for (const auto& ph : party_hists) sketches.push_back(ph.features[c].sketch);
        QuantileSketch fused = QuantileSketch::merged(sketches);

        FeatureHistogram& out = merged_hist.features[c];
        out.edges = extract_bins(fused, n_bins_m);
        const std::size_t bins = static_cast<std::size_t>(out.edges.n_bins());
        out.representatives.resize(bins);
        for (std::size_t b = 0; b < bins; ++b) {
            out.representatives[b] = out.edges.representative(static_cast<int>(b));
        }

        BinStats& stats = merged.features[c];
        stats.resize(bins);
        for (std::size_t p = 0; p < party_hists.size(); ++p) {
            const auto& fh = party_hists[p].features[c];
            const auto& pb = party_buckets[p].features[c];
            auto& map = remap[p][c];
            map.resize(fh.representatives.size());
            for (std::size_t b = 0; b < fh.representatives.size(); ++b) {
                const auto target =
                    static_cast<std::uint32_t>(out.edges.bin_of(fh.representatives[b]));
                map[b] = target;
                stats.g[target] += pb.g[b];
                stats.h[target] += pb.h[b];
                stats.count[target] += pb.count[b];
            }
            stats.g_missing += pb.g_missing;
            stats.h_missing += pb.h_missing;
            stats.count_missing += pb.count_missing;
        }

        out.counts.assign(bins, 0);
        for (std::size_t b = 0; b < bins; ++b) out.counts[b] = stats.count[b];
        out.missing_count = stats.count_missing;
        out.sketch = std::move(fused);
        merged.edges[c] = out.edges;
    });

    // Concatenate sample views in roster order, remapping bin ids.
    std::size_t total_rows = 0;
    for (const auto& pb : party_buckets) total_rows += pb.samples.n_rows;
    auto& s = merged.samples;
    s.n_rows = total_rows;
    s.n_cols = m;
    s.bin.resize(total_rows * m);
    s.grad.reserve(total_rows);
    s.hess.reserve(total_rows);

    std::size_t row_base = 0;
    for (std::size_t p = 0; p < party_buckets.size(); ++p) {
        const auto& ps = party_buckets[p].samples;
        parallel_for(ps.n_rows, mode, [&](std::size_t r) {
            for (std::size_t c = 0; c < m; ++c) {
                const std::uint32_t b = ps.bin_at(r, c);
                s.bin[(row_base + r) * m + c] = b == kMissingBin ? kMissingBin : remap[p][c][b];
            }
        });
        s.grad.insert(s.grad.end(), ps.grad.begin(), ps.grad.end());
        s.hess.insert(s.hess.end(), ps.hess.begin(), ps.hess.end());
        row_base += ps.n_rows;
        merged.loss_sum += party_buckets[p].loss_sum;
        merged_hist.sample_count += party_hists[p].sample_count;
    }
    return {std::move(merged_hist), std::move(merged)};
}

}  // namespace pax
