// hsc/labels.h
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

#ifndef HSC_LABELS_H_
#define HSC_LABELS_H_

#include <map>
#include <string>

#include "hsc/audio.h"

namespace hsc {

struct LabelEntry {
  Label label = Label::kNormal;
  Quality quality = Quality::kGood;
};

// record_id -> (label, quality); ordered so iteration is deterministic.
struct LabelTable {
  std::map<std::string, LabelEntry> entries;

  bool contains(const std::string& id) const {
    return entries.find(id) != entries.end();
  }
  std::size_t size() const { return entries.size(); }
};

// Parses reference CSV lines "record_id,code[,quality]" with code in
// {-1, 1} (-1 normal, 1 abnormal) and quality in {g, p} defaulting to good.
// Throws FormatError on unknown codes and on duplicate record ids.
LabelTable load_reference(const std::string& path);

}  // namespace hsc

#endif  // HSC_LABELS_H_
