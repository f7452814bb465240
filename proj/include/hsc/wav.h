// hsc/wav.h
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

#ifndef HSC_WAV_H_
#define HSC_WAV_H_

#include <string>
#include <vector>

#include "hsc/audio.h"

namespace hsc {

// Reads a mono 16-bit PCM RIFF/WAVE file.  Samples are scaled by 1/32768
// into [-1, 1]; record_id is the filename stem; label and quality are left
// unset.  Throws FormatError on malformed bytes and UnsupportedFormatError
// on multi-channel or non-16-bit content.
AudioRecord load_wav(const std::string& path);

// Writes samples as mono 16-bit PCM, clamping to [-1, 1] and rounding to the
// nearest quantization level.  Counterpart of load_wav for synthetic corpora.
void write_wav(const std::string& path, const std::vector<double>& samples,
               int sample_rate_hz);

}  // namespace hsc

#endif  // HSC_WAV_H_
