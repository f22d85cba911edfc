#include "rockcap/nn/mlp.hpp"

#include <stdexcept>
#include <string>

namespace rockcap::nn {

Mlp::Mlp(const std::vector<int>& sizes) {
  if (sizes.size() < 2) throw std::invalid_argument("Mlp needs at least input and output sizes");
  for (int s : sizes)
    if (s <= 0) throw std::invalid_argument("Mlp layer sizes must be positive");
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i)
    layers_.push_back({Matrix::Zero(sizes[i + 1], sizes[i]), Vector::Zero(sizes[i + 1])});
}

int Mlp::input_dim() const { return layers_.empty() ? 0 : layers_.front().weight.cols(); }
int Mlp::output_dim() const { return layers_.empty() ? 0 : layers_.back().weight.rows(); }

std::vector<int> Mlp::sizes() const {
  std::vector<int> s;
  if (layers_.empty()) return s;
  s.push_back(input_dim());
  for (const DenseLayer& l : layers_) s.push_back(l.weight.rows());
  return s;
}

int Mlp::parameter_count() const {
  int n = 0;
  for (const DenseLayer& l : layers_) n += l.weight.size() + l.bias.size();
  return n;
}

Vector Mlp::forward(const Vector& x) const {
  if (x.size() != input_dim())
    throw std::invalid_argument("Mlp input has " + std::to_string(x.size()) + " entries, expected " +
                                std::to_string(input_dim()));
  Vector h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Vector z = layers_[i].weight * h + layers_[i].bias;
    h = i + 1 < layers_.size() ? Vector(z.array().tanh()) : z;
  }
  return h;
}

Matrix Mlp::forward(const Matrix& x, MlpCache* cache) const {
  if (x.rows() != input_dim())
    throw std::invalid_argument("Mlp input has " + std::to_string(x.rows()) + " rows, expected " +
                                std::to_string(input_dim()));
  if (cache) cache->inputs.clear();
  Matrix h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (cache) cache->inputs.push_back(h);
    Matrix z = layers_[i].weight * h;
    z.colwise() += layers_[i].bias;
    h = i + 1 < layers_.size() ? Matrix(z.array().tanh()) : z;
  }
  if (cache) cache->output = h;
  return h;
}

Matrix Mlp::backward(const MlpCache& cache, const Matrix& upstream, Vector& grad) const {
  if (cache.inputs.size() != layers_.size())
    throw std::logic_error("Mlp::backward called without a cached forward pass");
  if (upstream.rows() != output_dim() || upstream.cols() != cache.output.cols())
    throw std::invalid_argument("Mlp::backward upstream gradient has the wrong shape");
  if (grad.size() != parameter_count()) grad = Vector::Zero(parameter_count());

  std::vector<int> offsets(layers_.size());
  int off = 0;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    offsets[i] = off;
    off += layers_[i].weight.size() + layers_[i].bias.size();
  }

  Matrix delta = upstream;  // d(loss)/d(pre-activation) of the current layer
  for (int i = static_cast<int>(layers_.size()) - 1; i >= 0; --i) {
    const DenseLayer& l = layers_[i];
    const Matrix& in = cache.inputs[i];
    const Matrix gw = delta * in.transpose();
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> w_grad(
        grad.data() + offsets[i], l.weight.rows(), l.weight.cols());
    w_grad += gw;
    grad.segment(offsets[i] + l.weight.size(), l.bias.size()) += delta.rowwise().sum();
    Matrix back = l.weight.transpose() * delta;
    if (i > 0) back.array() *= 1.0 - in.array().square();  // in = tanh of the previous layer
    delta = std::move(back);
  }
  return delta;
}

Vector Mlp::flat() const {
  Vector p(parameter_count());
  int off = 0;
  for (const DenseLayer& l : layers_) {
    for (int r = 0; r < l.weight.rows(); ++r)
      for (int c = 0; c < l.weight.cols(); ++c) p[off++] = l.weight(r, c);
    p.segment(off, l.bias.size()) = l.bias;
    off += l.bias.size();
  }
  return p;
}

void Mlp::set_flat(const Vector& p) {
  if (p.size() != parameter_count())
    throw std::invalid_argument("flat parameter vector has the wrong length");
  int off = 0;
  for (DenseLayer& l : layers_) {
    for (int r = 0; r < l.weight.rows(); ++r)
      for (int c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = p[off++];
    l.bias = p.segment(off, l.bias.size());
    off += l.bias.size();
  }
}

Matrix orthogonal(int rows, int cols, double gain, RandomStream& rng) {
  const int big = std::max(rows, cols), small = std::min(rows, cols);
  Matrix a(big, small);
  for (int j = 0; j < small; ++j)
    for (int i = 0; i < big; ++i) a(i, j) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(big, small);
  const Matrix r = qr.matrixQR().topLeftCorner(small, small);
  for (int j = 0; j < small; ++j)
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  Matrix out = rows >= cols ? q : Matrix(q.transpose());
  return gain * out;
}

void Mlp::init_orthogonal(RandomStream& rng, double hidden_gain, double output_gain) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    DenseLayer& l = layers_[i];
    const double gain = i + 1 < layers_.size() ? hidden_gain : output_gain;
    l.weight = orthogonal(l.weight.rows(), l.weight.cols(), gain, rng);
    l.bias.setZero();
  }
}

bool Mlp::operator==(const Mlp& o) const {
  if (layers_.size() != o.layers_.size()) return false;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const DenseLayer& a = layers_[i];
    const DenseLayer& b = o.layers_[i];
    if (a.weight.rows() != b.weight.rows() || a.weight.cols() != b.weight.cols()) return false;
    if (a.weight != b.weight || a.bias != b.bias) return false;
  }
  return true;
}

double spectral_norm(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
}

}  // namespace rockcap::nn
