#include "pax/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pax/error.hpp"

namespace pax {

Dataset Dataset::take(std::span<const std::size_t> rows) const {
    Dataset out;
    out.n_rows = rows.size();
    out.n_cols = n_cols;
    out.feature_names = feature_names;
    out.seed = seed;
    out.x.reserve(rows.size() * n_cols);
    out.y.reserve(rows.size());
    for (std::size_t r : rows) {
        if (r >= n_rows) throw Error("row index out of range");
        const auto src = row(r);
        out.x.insert(out.x.end(), src.begin(), src.end());
        out.y.push_back(y[r]);
    }
    return out;
}

void Dataset::validate() const {
    if (n_rows == 0) throw Error("dataset is empty");
    if (n_cols == 0) throw Error("dataset has no features");
    if (x.size() != n_rows * n_cols) throw DimensionError("feature matrix size mismatch");
    if (y.size() != n_rows) throw DimensionError("label vector size mismatch");
    for (double v : y) {
        if (!std::isfinite(v)) throw LabelError("labels must be finite");
    }
    if (!feature_names.empty() && feature_names.size() != n_cols) {
        throw DimensionError("feature name count mismatch");
    }
}

namespace {

// One CSV record, honoring quoted fields and embedded commas/quotes.
std::vector<std::string> split_record(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

bool parse_cell(const std::string& text, double& out) {
    const char* begin = text.data();
    const char* end = begin + text.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t')) --end;
    if (begin == end) return false;
    const auto res = std::from_chars(begin, end, out);
    return res.ec == std::errc() && res.ptr == end;
}

}  // namespace

Dataset load_csv(const std::string& path, const CsvOptions& opts) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw IngestError("'" + path + "' is empty");
    const auto header = split_record(line);

    std::size_t label_idx = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == opts.label_column) {
            label_idx = i;
            break;
        }
    }
    if (label_idx == header.size()) {
        throw IngestError("label column '" + opts.label_column + "' not found in '" + path + "'");
    }

    Dataset ds;
    ds.n_cols = header.size() - 1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i != label_idx) ds.feature_names.push_back(header[i]);
    }

    auto is_missing_token = [&](const std::string& s) {
        return std::find(opts.missing_tokens.begin(), opts.missing_tokens.end(), s) !=
               opts.missing_tokens.end();
    };

    std::size_t row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (line.empty() && in.eof()) break;
        const auto fields = split_record(line);
        if (fields.size() != header.size()) {
            throw IngestError("ragged row: expected " + std::to_string(header.size()) +
                                  " fields, got " + std::to_string(fields.size()),
                              row_no, fields.size());
        }
        for (std::size_t i = 0; i < fields.size(); ++i) {
            double v;
            if (i == label_idx) {
                if (!parse_cell(fields[i], v)) {
                    throw IngestError("unparseable label '" + fields[i] + "'", row_no, i + 1);
                }
                ds.y.push_back(v);
            } else if (is_missing_token(fields[i])) {
                ds.x.push_back(kMissing);
            } else if (parse_cell(fields[i], v)) {
                ds.x.push_back(v);
            } else {
                throw IngestError("unparseable cell '" + fields[i] + "'", row_no, i + 1);
            }
        }
        ++ds.n_rows;
    }
    if (ds.n_rows == 0) throw IngestError("'" + path + "' has a header but no data rows");
    ds.validate();
    return ds;
}

void write_csv(const std::string& path, const Dataset& ds, const CsvOptions& opts) {
    std::ofstream out(path);
    if (!out) throw IngestError("cannot open '" + path + "' for writing");
    out.precision(17);

    for (std::size_t c = 0; c < ds.n_cols; ++c) {
        const std::string name =
            c < ds.feature_names.size() ? ds.feature_names[c] : "f" + std::to_string(c);
        out << name << ',';
    }
    out << opts.label_column << '\n';

    const std::string missing = opts.missing_tokens.empty() ? "" : opts.missing_tokens.front();
    for (std::size_t r = 0; r < ds.n_rows; ++r) {
        for (std::size_t c = 0; c < ds.n_cols; ++c) {
            const double v = ds.at(r, c);
            if (is_missing(v)) {
                out << missing;
            } else {
                out << v;
            }
            out << ',';
        }
        out << ds.y[r] << '\n';
    }
}

}  // namespace pax
