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

#ifndef ASFCOV_CMX_HPP
#define ASFCOV_CMX_HPP

#include "asfcov/types.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace asfcov {

// CMX1 text matrices:
//   # CMX1 rows=<r> cols=<c>
//   <re>,<im>,<re>,<im>,...     (one line per row, 2c fields)
// Numbers use the shortest representation that round-trips exactly.
// Additional lines starting with '#' directly after the header are kept as
// metadata and otherwise ignored.

std::string format_double(double x);
double parse_double(std::string_view text);

void write_cmx(std::ostream& out, const CMatrix& m, const std::vector<std::string>& metadata = {});
void write_cmx(const std::filesystem::path& path, const CMatrix& m,
               const std::vector<std::string>& metadata = {});

struct CmxFile {
    CMatrix matrix;
    std::vector<std::string> metadata; // metadata lines without the leading "# "
};

CmxFile read_cmx(std::istream& in);
CmxFile read_cmx(const std::filesystem::path& path);

} // namespace asfcov

#endif
