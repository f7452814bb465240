// src/mfcc.cc
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

#include "hsc/mfcc.h"

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "hsc/error.h"
#include "hsc/parallel.h"

namespace hsc {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// In-place iterative radix-2 FFT; size must be a power of two.
void fft_radix2(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wn(std::cos(angle), std::sin(angle));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wn;
      }
    }
  }
}

double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

}  // namespace

int MfccConfig::frame_length() const {
  return static_cast<int>(
      std::lround(frame_ms * static_cast<double>(sample_rate_hz) / 1000.0));
}

int MfccConfig::hop_length() const {
  return static_cast<int>(
      std::lround(hop_ms * static_cast<double>(sample_rate_hz) / 1000.0));
}

void MfccConfig::validate() const {
  if (sample_rate_hz <= 0) throw ConfigError("mfcc: sample_rate_hz must be > 0");
  if (n_filters < 1) throw ConfigError("mfcc: n_filters must be >= 1");
  if (n_ceps < 1) throw ConfigError("mfcc: n_ceps must be >= 1");
  if (n_ceps > n_filters) {
    throw ConfigError("mfcc: n_ceps (" + std::to_string(n_ceps) +
                      ") must not exceed n_filters (" +
                      std::to_string(n_filters) + ")");
  }
  if (frame_length() < 1) throw ConfigError("mfcc: frame too short");
  if (hop_length() < 1) throw ConfigError("mfcc: hop too short");
  if (!is_power_of_two(fft_size)) {
    throw ConfigError("mfcc: fft_size must be a power of two");
  }
  if (fft_size < frame_length()) {
    throw ConfigError("mfcc: fft_size (" + std::to_string(fft_size) +
                      ") smaller than frame length (" +
                      std::to_string(frame_length()) + ")");
  }
}

std::vector<double> pre_emphasize(const std::vector<double>& signal,
                                  double coeff) {
  if (signal.empty()) throw InvalidInputError("pre_emphasize: empty signal");
  std::vector<double> out(signal.size());
  out[0] = signal[0];
  for (std::size_t n = 1; n < signal.size(); ++n) {
    out[n] = signal[n] - coeff * signal[n - 1];
  }
  return out;
}

Eigen::MatrixXd frame_and_window(const std::vector<double>& signal,
                                 const MfccConfig& config) {
  const int frame_len = config.frame_length();
  const int hop = config.hop_length();
  const auto len = static_cast<long long>(signal.size());
  if (len < frame_len) {
    throw InvalidInputError("frame_and_window: signal of " +
                            std::to_string(len) + " samples is shorter than " +
                            std::to_string(frame_len) + "-sample frame");
  }
  const long long n_frames = (len - frame_len) / hop + 1;

  Eigen::VectorXd window(frame_len);
  for (int n = 0; n < frame_len; ++n) {
    window[n] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n /
                                       static_cast<double>(frame_len - 1));
  }

  Eigen::MatrixXd frames(n_frames, frame_len);
  for (long long f = 0; f < n_frames; ++f) {
    const long long start = f * hop;
    for (int n = 0; n < frame_len; ++n) {
      frames(f, n) = signal[static_cast<std::size_t>(start + n)] * window[n];
    }
  }
  return frames;
}

Eigen::VectorXd power_spectrum(const Eigen::VectorXd& frame, int fft_size) {
  if (!is_power_of_two(fft_size)) {
    throw ConfigError("power_spectrum: fft_size must be a power of two");
  }
  if (frame.size() > fft_size) {
    throw InvalidInputError("power_spectrum: frame longer than fft_size");
  }
  std::vector<std::complex<double>> buf(static_cast<std::size_t>(fft_size),
                                        {0.0, 0.0});
  for (Eigen::Index n = 0; n < frame.size(); ++n) buf[n] = frame[n];
  fft_radix2(buf);
  Eigen::VectorXd mag(fft_size / 2 + 1);
  for (int k = 0; k <= fft_size / 2; ++k) mag[k] = std::abs(buf[k]);
  return mag;
}

double hz_to_mel(double f_hz) {
  if (f_hz < 0.0) throw InvalidInputError("hz_to_mel: negative frequency");
  return 2595.0 * std::log10(1.0 + f_hz / 700.0);
}

MelFilterbank build_mel_filterbank(const MfccConfig& config) {
  config.validate();
  const int n_bins = config.fft_size / 2 + 1;
  const double nyquist = config.sample_rate_hz / 2.0;
  const double mel_max = hz_to_mel(nyquist);
  const int L = config.n_filters;

  // L + 2 equally spaced mel points; filter l spans points l-1 .. l+1 and
  // peaks at point l, so adjacent filters overlap at each other's centers.
  std::vector<double> edge_hz(static_cast<std::size_t>(L) + 2);
  for (int j = 0; j < L + 2; ++j) {
    edge_hz[j] = mel_to_hz(mel_max * j / static_cast<double>(L + 1));
  }

  const double hz_per_bin =
      static_cast<double>(config.sample_rate_hz) / config.fft_size;
  MelFilterbank bank;
  bank.weights = Eigen::MatrixXd::Zero(L, n_bins);
  bank.lower_bin.resize(L);
  bank.upper_bin.resize(L);
  bank.center_hz.resize(L);

  int prev_center_bin = -1;
  for (int l = 0; l < L; ++l) {
    const double lo = edge_hz[l];
    const double center = edge_hz[l + 1];
    const double hi = edge_hz[l + 2];
    bank.center_hz[l] = center;

    const int center_bin = static_cast<int>(std::lround(center / hz_per_bin));
    if (center_bin <= prev_center_bin) {
      throw ConfigError(
          "mel filterbank: filter centers collide at FFT bin " +
          std::to_string(center_bin) + "; reduce n_filters or raise fft_size");
    }
    prev_center_bin = center_bin;

    int first = -1, last = -1;
    for (int k = 0; k < n_bins; ++k) {
      const double f = k * hz_per_bin;
      double w = 0.0;
      if (f > lo && f < center) {
        w = (f - lo) / (center - lo);
      } else if (f == center) {
        w = 1.0;
      } else if (f > center && f < hi) {
        w = (hi - f) / (hi - center);
      }
      if (w > 0.0) {
        bank.weights(l, k) = w;
        if (first < 0) first = k;
        last = k;
      }
    }
    if (first < 0) {
      throw ConfigError("mel filterbank: filter " + std::to_string(l) +
                        " covers no FFT bin; reduce n_filters or raise "
                        "fft_size");
    }
    bank.lower_bin[l] = first;
    bank.upper_bin[l] = last;
  }
  return bank;
}

Eigen::VectorXd log_mel_energies(const Eigen::VectorXd& spectrum,
                                 const MelFilterbank& bank) {
  if (spectrum.size() != bank.weights.cols()) {
    throw DimensionError("log_mel_energies: spectrum has " +
                         std::to_string(spectrum.size()) + " bins, bank has " +
                         std::to_string(bank.weights.cols()));
  }
  Eigen::VectorXd energies = bank.weights * spectrum;
  for (Eigen::Index l = 0; l < energies.size(); ++l) {
    energies[l] = std::log(std::max(energies[l], kLogEnergyFloor));
  }
  return energies;
}

Eigen::VectorXd dct_cepstra(const Eigen::VectorXd& log_energies, int n_ceps) {
  const auto L = static_cast<int>(log_energies.size());
  if (n_ceps > L) {
    throw ConfigError("dct_cepstra: n_ceps (" + std::to_string(n_ceps) +
                      ") exceeds filter count (" + std::to_string(L) + ")");
  }
  Eigen::VectorXd ceps(n_ceps);
  for (int m = 1; m <= n_ceps; ++m) {
    double acc = 0.0;
    for (int l = 1; l <= L; ++l) {
      acc += log_energies[l - 1] *
             std::cos(std::numbers::pi * m * (l - 0.5) / static_cast<double>(L));
    }
    ceps[m - 1] = acc;
  }
  return ceps;
}

namespace {

FeatureMatrix extract_with_bank(const AudioRecord& record,
                                const MfccConfig& config,
                                const MelFilterbank& bank) {
  if (record.sample_rate_hz != config.sample_rate_hz) {
    throw ConfigError("extract_mfcc: record '" + record.record_id + "' is " +
                      std::to_string(record.sample_rate_hz) +
                      " Hz but the config expects " +
                      std::to_string(config.sample_rate_hz) + " Hz");
  }
  const std::vector<double> emphasized =
      pre_emphasize(record.samples, config.pre_emphasis);
  const Eigen::MatrixXd frames = frame_and_window(emphasized, config);

  FeatureMatrix features(frames.rows(), config.n_ceps);
  for (Eigen::Index f = 0; f < frames.rows(); ++f) {
    const Eigen::VectorXd spectrum =
        power_spectrum(frames.row(f).transpose(), config.fft_size);
    const Eigen::VectorXd energies = log_mel_energies(spectrum, bank);
    features.row(f) = dct_cepstra(energies, config.n_ceps).transpose();
  }
  return features;
}

}  // namespace

FeatureMatrix extract_mfcc(const AudioRecord& record,
                           const MfccConfig& config) {
  config.validate();
  return extract_with_bank(record, config, build_mel_filterbank(config));
}

std::vector<FeatureMatrix> extract_mfcc_batch(
    const std::vector<AudioRecord>& records, const MfccConfig& config) {
  config.validate();
  const MelFilterbank bank = build_mel_filterbank(config);
  std::vector<FeatureMatrix> out(records.size());
  parallel_for(static_cast<int>(records.size()), [&](int i) {
    out[static_cast<std::size_t>(i)] =
        extract_with_bank(records[static_cast<std::size_t>(i)], config, bank);
  });
  return out;
}

}  // namespace hsc
