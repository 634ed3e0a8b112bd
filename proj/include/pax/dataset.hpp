#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pax/tree.hpp"

namespace pax {

// Dense row-major sample matrix with labels. Missing cells hold kMissing.
struct Dataset {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<double> x;  // n_rows * n_cols
    std::vector<double> y;  // n_rows
    std::vector<std::string> feature_names;
    std::uint64_t seed = 0;  // generator seed when synthetic, else 0

    double at(std::size_t r, std::size_t c) const { return x[r * n_cols + c]; }
    std::span<const double> row(std::size_t r) const {
        return std::span<const double>(x).subspan(r * n_cols, n_cols);
    }

    // Returns a dataset holding the given rows, in the given order.
    Dataset take(std::span<const std::size_t> rows) const;

    void validate() const;
};

struct CsvOptions {
    std::string label_column = "label";
    // Cell spellings that turn into kMissing.
    std::vector<std::string> missing_tokens = {"", "NA"};
};

// Strict numeric CSV reader (RFC-4180 quoting, header row required).
// Non-numeric cells that are not missing tokens raise IngestError with the
// offending location; so do ragged rows and an unknown label column.
Dataset load_csv(const std::string& path, const CsvOptions& opts = {});

// Writes a dataset back out; missing cells become the first missing token.
void write_csv(const std::string& path, const Dataset& ds, const CsvOptions& opts = {});

}  // namespace pax
