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

#include "csv_io.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace atmochan::cli {

namespace {

std::string trim(const std::string &s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string &line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ','))
        out.push_back(trim(field));
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

} // namespace

std::string format_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::string Provenance::comment() const {
    char buf[96];
    std::snprintf(buf, sizeof buf, "# provenance: config_hash=%016llx seed=%llu",
                  static_cast<unsigned long long>(config_hash), static_cast<unsigned long long>(seed));
    return buf;
}

std::uint64_t fnv1a64(const std::string &bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

CsvWriter::CsvWriter(const std::filesystem::path &path, const std::vector<std::string> &columns,
                     const Provenance &provenance)
    : path_(path), columns_(columns.size()) {
    file_ = std::fopen(path.c_str(), "w");
    if (!file_)
        throw std::runtime_error("cannot open " + path.string() + " for writing: " + std::strerror(errno));
    std::fprintf(file_, "%s\n", provenance.comment().c_str());
    for (std::size_t i = 0; i < columns.size(); ++i)
        std::fprintf(file_, "%s%s", i ? "," : "", columns[i].c_str());
    std::fputc('\n', file_);
}

CsvWriter::~CsvWriter() {
    if (file_)
        std::fclose(file_);
}

void CsvWriter::row(const std::vector<double> &values) {
    if (values.size() != columns_)
        throw std::logic_error("CsvWriter: row width does not match header for " + path_.string());
    char buf[64];
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", values[i]);
        std::fprintf(file_, "%s%s", i ? "," : "", buf);
    }
    std::fputc('\n', file_);
}

void CsvWriter::row_text(const std::vector<std::string> &values) {
    if (values.size() != columns_)
        throw std::logic_error("CsvWriter: row width does not match header for " + path_.string());
    for (std::size_t i = 0; i < values.size(); ++i)
        std::fprintf(file_, "%s%s", i ? "," : "", values[i].c_str());
    std::fputc('\n', file_);
}

void CsvWriter::comment(const std::string &text) {
    std::fprintf(file_, "# %s\n", text.c_str());
}

std::size_t CsvTable::column(const std::string &name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name)
            return i;
    throw IngestionError("missing required column '" + name + "'");
}

bool CsvTable::has_column(const std::string &name) const {
    for (const auto &c : columns)
        if (c == name)
            return true;
    return false;
}

CsvTable read_csv(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in)
        throw IngestionError("cannot open " + path.string());
    CsvTable table;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty())
            continue;
        if (t.front() == '#') {
            table.comments.push_back(trim(t.substr(1)));
            continue;
        }
        if (!have_header) {
            table.columns = split(t);
            have_header = true;
            continue;
        }
        table.rows.push_back(split(t));
        table.line_numbers.push_back(line_no);
    }
    if (!have_header)
        throw IngestionError(path.string() + ": no header line");
    return table;
}

bool parse_double(const std::string &text, double &value) {
    const char *first = text.data();
    const char *last = text.data() + text.size();
    if (first != last && *first == '+')
        ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    return ec == std::errc() && ptr == last && first != last;
}

MeasuredTrace read_measured_trace(const std::filesystem::path &path) {
    const CsvTable table = read_csv(path);
    const std::size_t col = table.column("transmittance");
    const bool has_time = table.has_column("timestamp_s");
    const std::size_t tcol = has_time ? table.column("timestamp_s") : 0;

    MeasuredTrace trace;
    trace.total_rows = table.rows.size();
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto &row = table.rows[r];
        const std::size_t line = table.line_numbers[r];
        double eta = 0.0;
        if (col >= row.size() || !parse_double(row[col], eta)) {
            trace.rejected.push_back({line, "non-numeric transmittance"});
            continue;
        }
        if (!(eta >= 0.0 && eta <= 1.0)) {
            trace.rejected.push_back({line, "transmittance " + format_double(eta) + " outside [0, 1]"});
            continue;
        }
        double ts = 0.0;
        if (has_time && (tcol >= row.size() || !parse_double(row[tcol], ts) || !std::isfinite(ts))) {
            trace.rejected.push_back({line, "non-numeric timestamp_s"});
            continue;
        }
        trace.transmittance.push_back(eta);
        if (has_time)
            trace.timestamp_s.push_back(ts);
    }
    if (trace.transmittance.empty()) {
        std::ostringstream msg;
        msg << path.string() << ": no usable transmittance rows (" << trace.total_rows << " data rows, "
            << trace.rejected.size() << " rejected)";
        if (!trace.rejected.empty())
            msg << "; first rejected line " << trace.rejected.front().line << ": " << trace.rejected.front().reason;
        throw IngestionError(msg.str());
    }
    return trace;
}

} // namespace atmochan::cli
