// src/container.cc
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

#include "hsc/container.h"

#include <cstring>
#include <fstream>
#include <map>
#include <utility>
#include <vector>

#include "hsc/error.h"

namespace hsc {

namespace {

constexpr char kMagic[8] = {'H', 'S', 'M', 'D', 'L', '0', '0', '1'};

struct Tensor {
  std::vector<uint64_t> shape;
  std::vector<double> data;
};

using TensorMap = std::map<std::string, Tensor>;

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const char* c = static_cast<const char*>(p);
    buf_.insert(buf_.end(), c, c + n);
  }
  void u32(uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b, 4);
  }
  void u64(uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b, 8);
  }
  void f64(double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    u64(bits);
  }
  const std::vector<char>& data() const { return buf_; }

 private:
  std::vector<char> buf_;
};

class Reader {
 public:
  Reader(std::vector<char> buf, std::string path)
      : buf_(std::move(buf)), path_(std::move(path)) {}

  void bytes(void* p, std::size_t n) {
    if (pos_ + n > buf_.size()) {
      throw FormatError("model container " + path_ + " is truncated at byte " +
                        std::to_string(pos_));
    }
    std::memcpy(p, buf_.data() + pos_, n);
    pos_ += n;
  }
  uint32_t u32() {
    unsigned char b[4];
    bytes(b, 4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
    return v;
  }
  uint64_t u64() {
    unsigned char b[8];
    bytes(b, 8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
    return v;
  }
  double f64() {
    const uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  const std::string& path() const { return path_; }

 private:
  std::vector<char> buf_;
  std::size_t pos_ = 0;
  std::string path_;
};

void write_file(const std::string& path, ModelKind kind,
                const std::vector<std::pair<std::string, Tensor>>& tensors) {
  Writer w;
  w.bytes(kMagic, sizeof(kMagic));
  w.u32(static_cast<uint32_t>(kind));
  w.u32(static_cast<uint32_t>(tensors.size()));
  for (const auto& [name, tensor] : tensors) {
    w.u32(static_cast<uint32_t>(name.size()));
    w.bytes(name.data(), name.size());
    w.u32(static_cast<uint32_t>(tensor.shape.size()));
    uint64_t count = 1;
    for (uint64_t dim : tensor.shape) {
      w.u64(dim);
      count *= dim;
    }
    if (count != tensor.data.size()) {
      throw Error("save_model: tensor '" + name + "' shape/data mismatch");
    }
    for (double v : tensor.data) w.f64(v);
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error("save_model: cannot open " + path + " for writing");
  }
  out.write(w.data().data(), static_cast<std::streamsize>(w.data().size()));
  if (!out) {
    throw Error("save_model: short write to " + path);
  }
}

Reader open_reader(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) {
    throw Error("load_model: cannot open " + path);
  }
  const std::streamsize size = in.tellg();
  in.seekg(0);
  std::vector<char> buf(static_cast<std::size_t>(size));
  in.read(buf.data(), size);
  if (!in) {
    throw FormatError("load_model: short read from " + path);
  }
  Reader r(std::move(buf), path);
  char magic[8];
  r.bytes(magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0) {
    throw FormatError("load_model: " + path + " is not a model container");
  }
  return r;
}

TensorMap read_tensors(const std::string& path, ModelKind expected) {
  Reader r = open_reader(path);
  const uint32_t kind = r.u32();
  if (kind != static_cast<uint32_t>(expected)) {
    const auto found = static_cast<ModelKind>(kind);
    throw IncompatibleModelError(
        "load_model: " + path + " holds a " + model_kind_name(found) +
        " but a " + model_kind_name(expected) + " was requested");
  }
  const uint32_t count = r.u32();
  TensorMap tensors;
  for (uint32_t i = 0; i < count; ++i) {
    const uint32_t name_len = r.u32();
    std::string name(name_len, '\0');
    r.bytes(name.data(), name_len);
    const uint32_t rank = r.u32();
    Tensor t;
    uint64_t total = 1;
    for (uint32_t k = 0; k < rank; ++k) {
      const uint64_t dim = r.u64();
      t.shape.push_back(dim);
      total *= dim;
    }
    t.data.resize(total);
    for (uint64_t k = 0; k < total; ++k) t.data[k] = r.f64();
    tensors.emplace(std::move(name), std::move(t));
  }
  return tensors;
}

Tensor from_matrix(const Eigen::MatrixXd& m) {
  Tensor t;
  t.shape = {static_cast<uint64_t>(m.rows()), static_cast<uint64_t>(m.cols())};
  t.data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) t.data.push_back(m(i, j));
  }
  return t;
}

Tensor from_vector(const Eigen::VectorXd& v) {
  Tensor t;
  t.shape = {static_cast<uint64_t>(v.size())};
  t.data.assign(v.data(), v.data() + v.size());
  return t;
}

Tensor from_scalar(double v) {
  Tensor t;
  t.data = {v};
  return t;
}

const Tensor& find(const TensorMap& tensors, const std::string& name,
                   const std::string& path) {
  const auto it = tensors.find(name);
  if (it == tensors.end()) {
    throw FormatError("load_model: " + path + " lacks tensor '" + name + "'");
  }
  return it->second;
}

Eigen::MatrixXd to_matrix(const TensorMap& tensors, const std::string& name,
                          const std::string& path) {
  const Tensor& t = find(tensors, name, path);
  if (t.shape.size() != 2) {
    throw FormatError("load_model: " + path + " tensor '" + name +
                      "' is not a matrix");
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(t.shape[0]),
                    static_cast<Eigen::Index>(t.shape[1]));
  std::size_t at = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = t.data[at++];
  }
  return m;
}

Eigen::VectorXd to_vector(const TensorMap& tensors, const std::string& name,
                          const std::string& path) {
  const Tensor& t = find(tensors, name, path);
  if (t.shape.size() != 1) {
    throw FormatError("load_model: " + path + " tensor '" + name +
                      "' is not a vector");
  }
  return Eigen::Map<const Eigen::VectorXd>(
      t.data.data(), static_cast<Eigen::Index>(t.data.size()));
}

double to_scalar(const TensorMap& tensors, const std::string& name,
                 const std::string& path) {
  const Tensor& t = find(tensors, name, path);
  if (!t.shape.empty() || t.data.size() != 1) {
    throw FormatError("load_model: " + path + " tensor '" + name +
                      "' is not a scalar");
  }
  return t.data[0];
}

}  // namespace

const char* model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kGmm:
      return "gaussian mixture";
    case ModelKind::kTotalVariability:
      return "total-variability model";
    case ModelKind::kPca:
      return "principal-component model";
    case ModelKind::kVae:
      return "variational autoencoder";
    case ModelKind::kSvm:
      return "support vector machine";
    case ModelKind::kFeatureMatrix:
      return "feature matrix";
    case ModelKind::kGmmPair:
      return "class mixture pair";
  }
  return "unknown model";
}

ModelKind peek_model_kind(const std::string& path) {
  Reader r = open_reader(path);
  return static_cast<ModelKind>(r.u32());
}

void save_model(const Gmm& model, const std::string& path) {
  write_file(path, ModelKind::kGmm,
             {{"weights", from_vector(model.weights)},
              {"means", from_matrix(model.means)},
              {"variances", from_matrix(model.variances)}});
}

Gmm load_gmm(const std::string& path) {
  const TensorMap tensors = read_tensors(path, ModelKind::kGmm);
  Gmm model;
  model.weights = to_vector(tensors, "weights", path);
  model.means = to_matrix(tensors, "means", path);
  model.variances = to_matrix(tensors, "variances", path);
  if (model.means.rows() != model.weights.size() ||
      model.variances.rows() != model.weights.size() ||
      model.variances.cols() != model.means.cols()) {
    throw FormatError("load_model: " + path + " mixture shapes disagree");
  }
  return model;
}

void save_model(const TotalVariabilityModel& model, const std::string& path) {
  write_file(path, ModelKind::kTotalVariability,
             {{"t", from_matrix(model.t)},
              {"ubm_means", from_vector(model.ubm_means)},
              {"ubm_variances", from_vector(model.ubm_variances)},
              {"components", from_scalar(model.components)},
              {"feat_dim", from_scalar(model.feat_dim)}});
}

TotalVariabilityModel load_tv(const std::string& path) {
  const TensorMap tensors = read_tensors(path, ModelKind::kTotalVariability);
  TotalVariabilityModel model;
  model.t = to_matrix(tensors, "t", path);
  model.ubm_means = to_vector(tensors, "ubm_means", path);
  model.ubm_variances = to_vector(tensors, "ubm_variances", path);
  model.components = static_cast<int>(to_scalar(tensors, "components", path));
  model.feat_dim = static_cast<int>(to_scalar(tensors, "feat_dim", path));
  const Eigen::Index super = static_cast<Eigen::Index>(model.components) *
                             static_cast<Eigen::Index>(model.feat_dim);
  if (model.t.rows() != super || model.ubm_means.size() != super ||
      model.ubm_variances.size() != super) {
    throw FormatError("load_model: " + path + " supervector shapes disagree");
  }
  return model;
}

void save_model(const PcaModel& model, const std::string& path) {
  write_file(path, ModelKind::kPca,
             {{"mean", from_vector(model.mean)},
              {"components", from_matrix(model.components)},
              {"eigenvalues", from_vector(model.eigenvalues)}});
}

PcaModel load_pca(const std::string& path) {
  const TensorMap tensors = read_tensors(path, ModelKind::kPca);
  PcaModel model;
  model.mean = to_vector(tensors, "mean", path);
  model.components = to_matrix(tensors, "components", path);
  model.eigenvalues = to_vector(tensors, "eigenvalues", path);
  if (model.components.rows() != model.mean.size() ||
      model.components.cols() != model.eigenvalues.size()) {
    throw FormatError("load_model: " + path + " projection shapes disagree");
  }
  return model;
}

void save_model(const VaeModel& model, const std::string& path) {
  write_file(path, ModelKind::kVae,
             {{"enc_w1", from_matrix(model.enc_w1)},
              {"enc_b1", from_vector(model.enc_b1)},
              {"enc_w_mu", from_matrix(model.enc_w_mu)},
              {"enc_b_mu", from_vector(model.enc_b_mu)},
              {"enc_w_logvar", from_matrix(model.enc_w_logvar)},
              {"enc_b_logvar", from_vector(model.enc_b_logvar)},
              {"dec_w1", from_matrix(model.dec_w1)},
              {"dec_b1", from_vector(model.dec_b1)},
              {"dec_w2", from_matrix(model.dec_w2)},
              {"dec_b2", from_vector(model.dec_b2)},
              {"input_mean", from_vector(model.input_mean)},
              {"input_std", from_vector(model.input_std)}});
}

VaeModel load_vae(const std::string& path) {
  const TensorMap tensors = read_tensors(path, ModelKind::kVae);
  VaeModel model;
  model.enc_w1 = to_matrix(tensors, "enc_w1", path);
  model.enc_b1 = to_vector(tensors, "enc_b1", path);
  model.enc_w_mu = to_matrix(tensors, "enc_w_mu", path);
  model.enc_b_mu = to_vector(tensors, "enc_b_mu", path);
  model.enc_w_logvar = to_matrix(tensors, "enc_w_logvar", path);
  model.enc_b_logvar = to_vector(tensors, "enc_b_logvar", path);
  model.dec_w1 = to_matrix(tensors, "dec_w1", path);
  model.dec_b1 = to_vector(tensors, "dec_b1", path);
  model.dec_w2 = to_matrix(tensors, "dec_w2", path);
  model.dec_b2 = to_vector(tensors, "dec_b2", path);
  model.input_mean = to_vector(tensors, "input_mean", path);
  model.input_std = to_vector(tensors, "input_std", path);
  if (model.enc_w_mu.rows() != model.enc_w_logvar.rows() ||
      model.dec_w2.rows() != model.enc_w1.cols() ||
      model.input_mean.size() != model.enc_w1.cols() ||
      model.input_std.size() != model.enc_w1.cols()) {
    throw FormatError("load_model: " + path + " network shapes disagree");
  }
  return model;
}

void save_model(const SvmModel& model, const std::string& path) {
  write_file(path, ModelKind::kSvm,
             {{"support_vectors", from_matrix(model.support_vectors)},
              {"dual_coeffs", from_vector(model.dual_coeffs)},
              {"bias", from_scalar(model.bias)},
              {"kernel_width", from_scalar(model.kernel_width)},
              {"c", from_scalar(model.c)},
              {"converged", from_scalar(model.converged ? 1.0 : 0.0)}});
}

SvmModel load_svm(const std::string& path) {
  const TensorMap tensors = read_tensors(path, ModelKind::kSvm);
  SvmModel model;
  model.support_vectors = to_matrix(tensors, "support_vectors", path);
  model.dual_coeffs = to_vector(tensors, "dual_coeffs", path);
  model.bias = to_scalar(tensors, "bias", path);
  model.kernel_width = to_scalar(tensors, "kernel_width", path);
  model.c = to_scalar(tensors, "c", path);
  model.converged = to_scalar(tensors, "converged", path) != 0.0;
  if (model.support_vectors.rows() != model.dual_coeffs.size()) {
    throw FormatError("load_model: " + path + " support shapes disagree");
  }
  return model;
}

void save_gmm_pair(const Gmm& normal_model, const Gmm& abnormal_model,
                   const std::string& path) {
  write_file(path, ModelKind::kGmmPair,
             {{"normal_weights", from_vector(normal_model.weights)},
              {"normal_means", from_matrix(normal_model.means)},
              {"normal_variances", from_matrix(normal_model.variances)},
              {"abnormal_weights", from_vector(abnormal_model.weights)},
              {"abnormal_means", from_matrix(abnormal_model.means)},
              {"abnormal_variances", from_matrix(abnormal_model.variances)}});
}

std::pair<Gmm, Gmm> load_gmm_pair(const std::string& path) {
  const TensorMap tensors = read_tensors(path, ModelKind::kGmmPair);
  Gmm normal_model;
  normal_model.weights = to_vector(tensors, "normal_weights", path);
  normal_model.means = to_matrix(tensors, "normal_means", path);
  normal_model.variances = to_matrix(tensors, "normal_variances", path);
  Gmm abnormal_model;
  abnormal_model.weights = to_vector(tensors, "abnormal_weights", path);
  abnormal_model.means = to_matrix(tensors, "abnormal_means", path);
  abnormal_model.variances = to_matrix(tensors, "abnormal_variances", path);
  for (const Gmm* m : {&normal_model, &abnormal_model}) {
    if (m->means.rows() != m->weights.size() ||
        m->variances.rows() != m->weights.size() ||
        m->variances.cols() != m->means.cols()) {
      throw FormatError("load_model: " + path + " mixture shapes disagree");
    }
  }
  if (normal_model.dim() != abnormal_model.dim()) {
    throw FormatError("load_model: " + path + " class dimensions disagree");
  }
  return {std::move(normal_model), std::move(abnormal_model)};
}

void save_feature_matrix(const Eigen::MatrixXd& matrix,
                         const std::string& path) {
  write_file(path, ModelKind::kFeatureMatrix, {{"data", from_matrix(matrix)}});
}

Eigen::MatrixXd load_feature_matrix(const std::string& path) {
  const TensorMap tensors = read_tensors(path, ModelKind::kFeatureMatrix);
  return to_matrix(tensors, "data", path);
}

}  // namespace hsc
