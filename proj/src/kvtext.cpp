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

#include "asfcov/kvtext.hpp"

#include <istream>
#include <ostream>
#include <sstream>

namespace asfcov {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool is_bare_word(const std::string& v)
{
    if (v.empty())
        return false;
    const char c = v.front();
    if (c == '"' || c == '[' || c == '{' || c == '-' || c == '+' || (c >= '0' && c <= '9') || c == '.')
        return false;
    return v != "true" && v != "false" && v != "null";
}

} // namespace

KvDocument parse_kv(std::istream& in)
{
    KvDocument doc = KvDocument::object();
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#')
            continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("line " + std::to_string(lineno) + ": empty key");
        if (doc.contains(key))
            throw std::invalid_argument("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        if (is_bare_word(value)) {
            doc[key] = value;
            continue;
        }
        try {
            doc[key] = KvDocument::parse(value);
        } catch (const nlohmann::json::parse_error& e) {
            throw std::invalid_argument("line " + std::to_string(lineno) + ": bad value for '" + key + "': " + e.what());
        }
    }
    return doc;
}

KvDocument parse_kv_string(const std::string& text)
{
    std::istringstream in(text);
    return parse_kv(in);
}

void write_kv(std::ostream& out, const KvDocument& doc)
{
    for (const auto& [key, value] : doc.items())
        out << key << " = " << value.dump() << '\n';
}

} // namespace asfcov
