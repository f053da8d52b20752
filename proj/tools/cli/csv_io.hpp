// SPDX-License-Identifier: Apache-2.0
//
// atmochan: transmittance statistics of atmospheric quantum channels
// Copyright (C) 2026 The atmochan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace atmochan::cli {

// Malformed or unusable input data (exit code 3).
class IngestionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Floats are written with 17 significant digits so they round-trip exactly.
std::string format_double(double value);

struct Provenance {
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;

    std::string comment() const; // "# provenance: config_hash=... seed=..."
};

// FNV-1a over the raw bytes.
std::uint64_t fnv1a64(const std::string &bytes);

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path &path, const std::vector<std::string> &columns, const Provenance &provenance);
    ~CsvWriter();
    CsvWriter(const CsvWriter &) = delete;
    CsvWriter &operator=(const CsvWriter &) = delete;

    void row(const std::vector<double> &values);
    void row_text(const std::vector<std::string> &values);
    void comment(const std::string &text);

private:
    std::filesystem::path path_;
    std::FILE *file_ = nullptr;
    std::size_t columns_ = 0;
};

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers; // 1-based source line of each row
    std::vector<std::string> comments;     // without the leading '#'

    // Throws IngestionError if the column is absent.
    std::size_t column(const std::string &name) const;
    bool has_column(const std::string &name) const;
};

// Reads a headered CSV; lines starting with '#' and blank lines are skipped.
CsvTable read_csv(const std::filesystem::path &path);

// Strict numeric parse of a whole field; false if the text is not a number.
bool parse_double(const std::string &text, double &value);

struct RejectedRow {
    std::size_t line = 0;
    std::string reason;
};

struct MeasuredTrace {
    std::vector<double> transmittance;
    std::vector<double> timestamp_s; // empty when the column is absent
    std::vector<RejectedRow> rejected;
    std::size_t total_rows = 0;

    double rejected_fraction() const {
        return total_rows == 0 ? 0.0 : static_cast<double>(rejected.size()) / static_cast<double>(total_rows);
    }
};

// Column `transmittance` (reals in [0, 1]) and optional `timestamp_s`.
// Non-numeric or out-of-range rows are rejected and reported by line; a file
// without any usable row is an IngestionError.
MeasuredTrace read_measured_trace(const std::filesystem::path &path);

} // namespace atmochan::cli
