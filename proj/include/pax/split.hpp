#pragma once

#include <optional>
#include <span>

#include "pax/config.hpp"
#include "pax/exec.hpp"
#include "pax/histogram.hpp"
#include "pax/tree.hpp"

namespace pax {

// Optimal second-order leaf weight -G/(H+lambda). Throws on H+lambda <= 0.
double leaf_weight(double G, double H, double lambda);

// Regularized objective reduction of a candidate split:
//   1/2 [GL^2/(HL+l) + GR^2/(HR+l) - (GL+GR)^2/(HL+HR+l)] - gamma
double split_gain(double GL, double HL, double GR, double HR, double lambda, double gamma);

struct SplitCandidate {
    int feature = -1;
    double threshold = 0.0;  // upper edge of the last left-side bin
    int bin = -1;            // index of that bin
    double gain = 0.0;
    Direction default_dir = Direction::Left;  // side that receives missing values
};

// Scans every feature's bin boundaries with prefix/suffix sums and returns
// the best candidate whose gain exceeds min_gain, or nullopt. Missing mass
// is tried on both sides and kept on the better one. Ties break toward the
// lowest feature index, then the lowest threshold, independent of the
// evaluation order of features.
std::optional<SplitCandidate> find_best_split(std::span<const BinStats> stats,
                                              std::span<const BinEdges> edges, double lambda,
                                              double gamma, double min_gain,
                                              ExecMode mode = ExecMode::Parallel);

std::optional<SplitCandidate> find_best_split(const GradHessBuckets& buckets, double lambda,
                                              double gamma, double min_gain,
                                              ExecMode mode = ExecMode::Parallel);

// Grows one tree breadth-first from bucketed samples: each node's histogram
// is rebuilt from the rows it owns, split while find_best_split accepts and
// depth allows, and closed as a leaf with weight -G/(H+lambda) otherwise.
// Deterministic for identical inputs regardless of thread count.
Tree grow_tree(const GradHessBuckets& buckets, const TrainingConfig& config,
               ExecMode mode = ExecMode::Parallel);

}  // namespace pax
