#pragma once

#include <vector>

#include <Eigen/Dense>

#include "rockcap/core/rng.hpp"

namespace rockcap::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;    // out
};

// Activations of one batched forward pass; inputs are columns.
struct MlpCache {
  std::vector<Matrix> inputs;  // input to each layer
  Matrix output;
};

// Dense network with tanh on hidden layers and a linear output layer.
class Mlp {
 public:
  Mlp() = default;
  // sizes = {input, hidden..., output}
  explicit Mlp(const std::vector<int>& sizes);

  int input_dim() const;
  int output_dim() const;
  std::vector<int> sizes() const;
  int parameter_count() const;

  // Throws std::invalid_argument on dimension mismatch.
  Vector forward(const Vector& x) const;
  Matrix forward(const Matrix& x, MlpCache* cache = nullptr) const;

  // Adds d(loss)/d(params) into `grad` (flat layout, see flat()); returns d(loss)/d(input).
  // Throws std::logic_error if the cache holds no forward pass.
  Matrix backward(const MlpCache& cache, const Matrix& upstream, Vector& grad) const;

  // Flat layout: for each layer, weight row-major then bias.
  Vector flat() const;
  void set_flat(const Vector& p);

  // Orthogonal weights with per-layer gains, zero biases.
  void init_orthogonal(RandomStream& rng, double hidden_gain, double output_gain);

  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  bool operator==(const Mlp& o) const;

 private:
  std::vector<DenseLayer> layers_;
};

// Orthogonal (rows x cols) matrix scaled by gain.
Matrix orthogonal(int rows, int cols, double gain, RandomStream& rng);

// Largest singular value.
double spectral_norm(const Matrix& m);

}  // namespace rockcap::nn
