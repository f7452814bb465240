// hsc/container.h
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

#ifndef HSC_CONTAINER_H_
#define HSC_CONTAINER_H_

#include <cstdint>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "hsc/gmm.h"
#include "hsc/ivector.h"
#include "hsc/pca.h"
#include "hsc/svm.h"
#include "hsc/vae.h"

namespace hsc {

// Every trained artifact shares one binary container: an 8-byte magic, a
// kind tag, then named little-endian float64 tensors.  Doubles round-trip
// by bit pattern, so save followed by load is an identity.
enum class ModelKind : uint32_t {
  kGmm = 1,
  kTotalVariability = 2,
  kPca = 3,
  kVae = 4,
  kSvm = 5,
  kFeatureMatrix = 6,
  kGmmPair = 7,
};

const char* model_kind_name(ModelKind kind);

// Reads just the kind tag of a container file.
ModelKind peek_model_kind(const std::string& path);

void save_model(const Gmm& model, const std::string& path);
void save_model(const TotalVariabilityModel& model, const std::string& path);
void save_model(const PcaModel& model, const std::string& path);
void save_model(const VaeModel& model, const std::string& path);
void save_model(const SvmModel& model, const std::string& path);

// Loading a file whose kind tag disagrees with the requested type raises
// IncompatibleModelError; malformed or truncated bytes raise FormatError.
Gmm load_gmm(const std::string& path);
TotalVariabilityModel load_tv(const std::string& path);
PcaModel load_pca(const std::string& path);
VaeModel load_vae(const std::string& path);
SvmModel load_svm(const std::string& path);

// The two class-conditional mixtures of a likelihood-ratio classifier
// travel together in one file.
void save_gmm_pair(const Gmm& normal_model, const Gmm& abnormal_model,
                   const std::string& path);
std::pair<Gmm, Gmm> load_gmm_pair(const std::string& path);

// Plain matrices (feature dumps, exported embeddings) ride in the same
// container under their own kind.
void save_feature_matrix(const Eigen::MatrixXd& matrix,
                         const std::string& path);
Eigen::MatrixXd load_feature_matrix(const std::string& path);

}  // namespace hsc

#endif  // HSC_CONTAINER_H_
