// hsc/audio.h
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

#ifndef HSC_AUDIO_H_
#define HSC_AUDIO_H_

#include <optional>
#include <string>
#include <vector>

namespace hsc {

enum class Label { kNormal, kAbnormal };
enum class Quality { kGood, kPoor };

// One labeled, quality-flagged PCM signal; the input unit of the pipeline.
struct AudioRecord {
  std::string record_id;
  std::vector<double> samples;  // amplitudes in [-1, 1]
  int sample_rate_hz = 0;
  std::optional<Label> label;
  Quality quality = Quality::kGood;
};

}  // namespace hsc

#endif  // HSC_AUDIO_H_
