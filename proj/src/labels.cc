// src/labels.cc
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hsc/labels.h"

#include <fstream>
#include <sstream>
#include <vector>

#include "hsc/error.h"

namespace hsc {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

LabelTable load_reference(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open reference file: " + path);

  LabelTable table;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = path + ":" + std::to_string(lineno);
    line = trim(line);
    if (line.empty()) continue;

    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    if (fields.size() < 2 || fields.size() > 3) {
      throw FormatError("expected 'id,code[,quality]' at " + where);
    }

    const std::string& id = fields[0];
    if (id.empty()) throw FormatError("empty record id at " + where);
    if (table.contains(id)) {
      throw FormatError("duplicate record id '" + id + "' at " + where);
    }

    LabelEntry entry;
    if (fields[1] == "-1") {
      entry.label = Label::kNormal;
    } else if (fields[1] == "1") {
      entry.label = Label::kAbnormal;
    } else {
      throw FormatError("unknown label code '" + fields[1] + "' at " + where);
    }

    if (fields.size() == 3 && !fields[2].empty()) {
      if (fields[2] == "g") {
        entry.quality = Quality::kGood;
      } else if (fields[2] == "p") {
        entry.quality = Quality::kPoor;
      } else {
        throw FormatError("unknown quality '" + fields[2] + "' at " + where);
      }
    }
    table.entries.emplace(id, entry);
  }
  return table;
}

}  // namespace hsc
