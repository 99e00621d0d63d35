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

#ifndef ASFCOV_KVTEXT_HPP
#define ASFCOV_KVTEXT_HPP

#include <json.hpp>

#include <iosfwd>
#include <string>

namespace asfcov {

// Key-value text used for configs, scene files and reports:
//
//   # comment
//   M = 32
//   methods = ["nnls", "em"]
//   dictionary = {"kind": "dirac", "G": 64}
//
// One `key = value` per line; values are JSON literals, and bare words
// (e.g. `kind = dirac`) are read as strings. Duplicate keys are an error.

using KvDocument = nlohmann::ordered_json;

KvDocument parse_kv(std::istream& in);
KvDocument parse_kv_string(const std::string& text);
void write_kv(std::ostream& out, const KvDocument& doc);

} // namespace asfcov

#endif
