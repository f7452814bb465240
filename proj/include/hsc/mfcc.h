// hsc/mfcc.h
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

#ifndef HSC_MFCC_H_
#define HSC_MFCC_H_

#include <vector>

#include <Eigen/Dense>

#include "hsc/audio.h"

namespace hsc {

// Silent filter energies are clamped here before the log.
inline constexpr double kLogEnergyFloor = 1e-10;

struct MfccConfig {
  double pre_emphasis = 0.97;
  double frame_ms = 25.0;
  double hop_ms = 10.0;
  int fft_size = 64;
  int n_filters = 20;   // L
  int n_ceps = 12;      // M, kept as coefficients 1..M (no C[0])
  int sample_rate_hz = 2000;

  int frame_length() const;  // round(frame_ms * sample_rate_hz / 1000)
  int hop_length() const;
  void validate() const;  // throws ConfigError
};

struct MelFilterbank {
  Eigen::MatrixXd weights;         // L x (fft_size/2 + 1), peak 1 at center
  std::vector<int> lower_bin;      // first bin with positive weight
  std::vector<int> upper_bin;      // last bin with positive weight
  std::vector<double> center_hz;   // strictly increasing
};

// One row of cepstra per frame.
using FeatureMatrix = Eigen::MatrixXd;

// out[0] = s[0]; out[n] = s[n] - coeff * s[n-1].
std::vector<double> pre_emphasize(const std::vector<double>& signal,
                                  double coeff);

// Frames every hop with the Hamming window applied; one row per frame.
// Frame count = floor((len - N) / hop) + 1.
Eigen::MatrixXd frame_and_window(const std::vector<double>& signal,
                                 const MfccConfig& config);

// |H[k]| for k = 0..fft_size/2 of the zero-padded frame.
Eigen::VectorXd power_spectrum(const Eigen::VectorXd& frame, int fft_size);

// 2595 * log10(1 + f / 700).
double hz_to_mel(double f_hz);

// L triangular filters with centers equally spaced on the mel axis between
// 0 and Nyquist; adjacent filters overlap at each other's centers.
MelFilterbank build_mel_filterbank(const MfccConfig& config);

// X[l] = log(sum_k |H[k]| W_l(k)), floored at kLogEnergyFloor.
Eigen::VectorXd log_mel_energies(const Eigen::VectorXd& spectrum,
                                 const MelFilterbank& bank);

// C[m] = sum_{l=1..L} X[l] cos(pi m (l - 0.5) / L) for m = 1..n_ceps.
Eigen::VectorXd dct_cepstra(const Eigen::VectorXd& log_energies, int n_ceps);

// Full pipeline; rejects records whose sample rate differs from the config.
FeatureMatrix extract_mfcc(const AudioRecord& record, const MfccConfig& config);

// Featurizes records in parallel; results are positionally aligned with the
// input and identical to per-record extract_mfcc calls.
std::vector<FeatureMatrix> extract_mfcc_batch(
    const std::vector<AudioRecord>& records, const MfccConfig& config);

}  // namespace hsc

#endif  // HSC_MFCC_H_
