// SPDX-License-Identifier: Apache-2.0
//
// asfcov - parametric channel covariance estimation for large antenna arrays
// Copyright (C) 2026 The asfcov authors
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

#include "asfcov/cmx.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace asfcov {

std::string format_double(double x)
{
    if (!std::isfinite(x))
        throw std::invalid_argument("format_double: non-finite value");
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text)
{
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t'))
        text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
        text.remove_suffix(1);
    if (!text.empty() && text.front() == '+')
        text.remove_prefix(1);
    double value = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw std::invalid_argument("cannot parse number '" + std::string(text) + "'");
    return value;
}

void write_cmx(std::ostream& out, const CMatrix& m, const std::vector<std::string>& metadata)
{
    out << "# CMX1 rows=" << m.rows() << " cols=" << m.cols() << '\n';
    for (const auto& line : metadata)
        out << "# " << line << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c > 0)
                out << ',';
            out << format_double(m(r, c).real()) << ',' << format_double(m(r, c).imag());
        }
        out << '\n';
    }
}

void write_cmx(const std::filesystem::path& path, const CMatrix& m, const std::vector<std::string>& metadata)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_cmx(out, m, metadata);
    if (!out)
        throw std::runtime_error("write failed: " + path.string());
}

CmxFile read_cmx(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line))
        throw std::invalid_argument("CMX1: empty input");
    long rows = -1, cols = -1;
    {
        std::istringstream hdr(line);
        std::string hash, tag, rtok, ctok;
        hdr >> hash >> tag >> rtok >> ctok;
        if (hash != "#" || tag != "CMX1" || rtok.rfind("rows=", 0) != 0 || ctok.rfind("cols=", 0) != 0)
            throw std::invalid_argument("CMX1: malformed header '" + line + "'");
        rows = std::stol(rtok.substr(5));
        cols = std::stol(ctok.substr(5));
        if (rows < 0 || cols < 0)
            throw std::invalid_argument("CMX1: negative dimensions");
    }

    CmxFile file;
    file.matrix.resize(rows, cols);
    long r = 0;
    while (r < rows && std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        if (line[0] == '#') {
            if (r != 0)
                throw std::invalid_argument("CMX1: metadata after data rows");
            file.metadata.push_back(line.size() > 2 ? line.substr(2) : std::string());
            continue;
        }
        std::vector<double> fields;
        std::size_t start = 0;
        while (start <= line.size()) {
            const std::size_t comma = line.find(',', start);
            const std::size_t end = comma == std::string::npos ? line.size() : comma;
            fields.push_back(parse_double(std::string_view(line).substr(start, end - start)));
            if (comma == std::string::npos)
                break;
            start = comma + 1;
        }
        if (static_cast<long>(fields.size()) != 2 * cols)
            throw std::invalid_argument("CMX1: row " + std::to_string(r) + " has wrong field count");
        for (long c = 0; c < cols; ++c)
            file.matrix(r, c) = cdouble(fields[2 * c], fields[2 * c + 1]);
        ++r;
    }
    if (r != rows)
        throw std::invalid_argument("CMX1: expected " + std::to_string(rows) + " rows, got " + std::to_string(r));
    if (!file.matrix.allFinite())
        throw std::invalid_argument("CMX1: non-finite entries");
    return file;
}

CmxFile read_cmx(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path.string());
    return read_cmx(in);
}

} // namespace asfcov
