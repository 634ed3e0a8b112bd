#include "pax/split.hpp"

#include <algorithm>
#include <cmath>

#include "pax/error.hpp"

namespace pax {

double leaf_weight(double G, double H, double lambda) {
    const double denom = H + lambda;
    if (!(denom > 0.0)) {
        throw Error("degenerate leaf: H + lambda must be positive, got " + std::to_string(denom));
    }
    return -G / denom;
}

double split_gain(double GL, double HL, double GR, double HR, double lambda, double gamma) {
    return 0.5 * (GL * GL / (HL + lambda) + GR * GR / (HR + lambda) -
                  (GL + GR) * (GL + GR) / (HL + HR + lambda)) -
           gamma;
}

namespace {

struct FeatureBest {
    bool found = false;
    double gain = 0.0;
    int bin = -1;
    Direction default_dir = Direction::Left;
};

FeatureBest scan_feature(const BinStats& stats, double lambda, double gamma) {
    FeatureBest best;
    const std::size_t bins = stats.g.size();
    if (bins < 2 && stats.count_missing == 0) return best;

    double g_total = stats.g_missing;
    double h_total = stats.h_missing;
    std::int64_t c_total = stats.count_missing;
    for (std::size_t b = 0; b < bins; ++b) {
        g_total += stats.g[b];
        h_total += stats.h[b];
        c_total += stats.count[b];
    }

    double gl = 0.0;
    double hl = 0.0;
    std::int64_t cl = 0;
    for (std::size_t b = 0; b + 1 < bins; ++b) {
        gl += stats.g[b];
        hl += stats.h[b];
        cl += stats.count[b];

        // Try the missing bucket on each side; keep the better placement.
        for (const Direction dir : {Direction::Left, Direction::Right}) {
            const bool miss_left = dir == Direction::Left;
            const double GL = miss_left ? gl + stats.g_missing : gl;
            const double HL = miss_left ? hl + stats.h_missing : hl;
            const std::int64_t CL = miss_left ? cl + stats.count_missing : cl;
            const double GR = g_total - GL;
            const double HR = h_total - HL;
            const std::int64_t CR = c_total - CL;
            if (CL == 0 || CR == 0) continue;
            if (!(HL + lambda > 0.0) || !(HR + lambda > 0.0)) continue;
            const double gain = split_gain(GL, HL, GR, HR, lambda, gamma);
            if (!best.found || gain > best.gain) {
                best.found = true;
                best.gain = gain;
                best.bin = static_cast<int>(b);
                best.default_dir = dir;
            }
        }
    }
    return best;
}

}  // namespace

std::optional<SplitCandidate> find_best_split(std::span<const BinStats> stats,
                                              std::span<const BinEdges> edges, double lambda,
                                              double gamma, double min_gain, ExecMode mode) {
    if (stats.empty() || stats.size() != edges.size()) {
        throw Error("split scan needs one bin-stats block per feature");
    }
    for (std::size_t c = 0; c < stats.size(); ++c) {
        if (stats[c].g.empty() || stats[c].g.size() != static_cast<std::size_t>(edges[c].n_bins())) {
            throw Error("bin stats do not match the bin layout for feature " + std::to_string(c));
        }
    }

    std::vector<FeatureBest> per_feature(stats.size());
    parallel_for(stats.size(), mode,
                 [&](std::size_t c) { per_feature[c] = scan_feature(stats[c], lambda, gamma); });

    // Deterministic reduction: strict > keeps the lowest feature index and,
    // within scan_feature, the lowest threshold on exact gain ties.
    int best_f = -1;
    for (std::size_t c = 0; c < per_feature.size(); ++c) {
        if (!per_feature[c].found) continue;
        if (best_f < 0 || per_feature[c].gain > per_feature[static_cast<std::size_t>(best_f)].gain) {
            best_f = static_cast<int>(c);
        }
    }
    if (best_f < 0) return std::nullopt;

    const FeatureBest& fb = per_feature[static_cast<std::size_t>(best_f)];
    if (!(fb.gain > min_gain)) return std::nullopt;

    SplitCandidate out;
    out.feature = best_f;
    out.bin = fb.bin;
    out.threshold = edges[static_cast<std::size_t>(best_f)].upper_of(fb.bin);
    out.gain = fb.gain;
    out.default_dir = fb.default_dir;
    return out;
}

std::optional<SplitCandidate> find_best_split(const GradHessBuckets& buckets, double lambda,
                                              double gamma, double min_gain, ExecMode mode) {
    return find_best_split(buckets.features, buckets.edges, lambda, gamma, min_gain, mode);
}

namespace {

struct PendingNode {
    int node_id;
    std::size_t begin;  // range in the shared row-index array
    std::size_t end;
    int depth;
};

}  // namespace

Tree grow_tree(const GradHessBuckets& buckets, const TrainingConfig& config, ExecMode mode) {
    config.validate();
    const auto& s = buckets.samples;
    if (s.n_rows == 0 || buckets.features.empty()) {
        throw Error("cannot grow a tree from empty buckets");
    }
    if (s.n_cols != buckets.n_features()) {
        throw DimensionError("sample view does not match the bucket schema");
    }

    Tree tree;
    std::vector<std::size_t> rows(s.n_rows);
    for (std::size_t i = 0; i < s.n_rows; ++i) rows[i] = i;

    tree.nodes.push_back(Node::leaf(0.0));
    std::vector<PendingNode> level{{0, 0, s.n_rows, 0}};

    std::vector<BinStats> node_stats(s.n_cols);

    while (!level.empty()) {
        std::vector<PendingNode> next;
        for (const PendingNode& pn : level) {
            const std::span<const std::size_t> node_rows(rows.data() + pn.begin, pn.end - pn.begin);

            double G = 0.0;
            double H = 0.0;
            for (std::size_t r : node_rows) {
                G += s.grad[r];
                H += s.hess[r];
            }

            std::optional<SplitCandidate> split;
            if (pn.depth < config.max_depth) {
                parallel_for(s.n_cols, mode, [&](std::size_t c) {
                    BinStats& st = node_stats[c];
                    st = BinStats{};
                    st.resize(buckets.features[c].g.size());
                    for (std::size_t r : node_rows) {
                        const std::uint32_t b = s.bin_at(r, c);
                        if (b == kMissingBin) {
                            st.g_missing += s.grad[r];
                            st.h_missing += s.hess[r];
                            ++st.count_missing;
                        } else {
                            st.g[b] += s.grad[r];
                            st.h[b] += s.hess[r];
                            ++st.count[b];
                        }
                    }
                });
                split = find_best_split(node_stats, buckets.edges, config.lambda, config.gamma,
                                        config.min_gain, mode);
            }

            if (!split) {
                tree.nodes[static_cast<std::size_t>(pn.node_id)] =
                    Node::leaf(leaf_weight(G, H, config.lambda));
                tree.depth = std::max(tree.depth, pn.depth);
                continue;
            }

            const auto goes_left = [&](std::size_t r) {
                const std::uint32_t b = s.bin_at(r, static_cast<std::size_t>(split->feature));
                if (b == kMissingBin) return split->default_dir == Direction::Left;
                return b <= static_cast<std::uint32_t>(split->bin);
            };
            // Stable partition keeps row order deterministic within children.
            auto* base = rows.data();
            const auto mid = std::stable_partition(base + pn.begin, base + pn.end, goes_left);
            const std::size_t mid_idx = static_cast<std::size_t>(mid - base);

            const int left_id = static_cast<int>(tree.nodes.size());
            tree.nodes.push_back(Node::leaf(0.0));
            const int right_id = static_cast<int>(tree.nodes.size());
            tree.nodes.push_back(Node::leaf(0.0));
            tree.nodes[static_cast<std::size_t>(pn.node_id)] = Node::internal(
                split->feature, split->threshold, split->default_dir, left_id, right_id);

            next.push_back({left_id, pn.begin, mid_idx, pn.depth + 1});
            next.push_back({right_id, mid_idx, pn.end, pn.depth + 1});
        }
        level = std::move(next);
    }
    return tree;
}

}  // namespace pax
