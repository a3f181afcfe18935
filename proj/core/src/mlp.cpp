#include "blueprint/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace blueprint {

Mlp::Mlp(std::vector<std::size_t> sizes, std::size_t offset)
    : sizes_(std::move(sizes)), offset_(offset) {
  if (sizes_.size() < 2) throw std::invalid_argument("mlp: need at least input and output sizes");
  std::size_t cursor = offset_;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    if (sizes_[l] == 0 || sizes_[l + 1] == 0) throw std::invalid_argument("mlp: zero-width layer");
    layer_offsets_.push_back(cursor);
    cursor += sizes_[l] * sizes_[l + 1] + sizes_[l + 1];
  }
  count_ = cursor - offset_;
}

void Mlp::forward(std::span<const double> params, std::span<const double> input,
                  Tape& tape) const {
  const std::size_t n_layers = sizes_.size() - 1;
  tape.layers.resize(sizes_.size());
  tape.layers[0].assign(input.begin(), input.end());
  for (std::size_t l = 0; l < n_layers; ++l) {
    const std::size_t in = sizes_[l];
    const std::size_t out = sizes_[l + 1];
    const double* w = params.data() + weight_offset(l);
    const double* b = params.data() + bias_offset(l);
    const auto& x = tape.layers[l];
    auto& y = tape.layers[l + 1];
    y.resize(out);
    const bool hidden = l + 1 < n_layers;
    for (std::size_t o = 0; o < out; ++o) {
      double acc = b[o];
      const double* row = w + o * in;
      for (std::size_t i = 0; i < in; ++i) acc += row[i] * x[i];
      y[o] = hidden ? std::tanh(acc) : acc;
    }
  }
}

std::vector<double> Mlp::forward(std::span<const double> params,
                                 std::span<const double> input) const {
  Tape tape;
  forward(params, input, tape);
  return std::move(tape.layers.back());
}

void Mlp::backward(std::span<const double> params, const Tape& tape,
                   std::span<const double> grad_output, std::span<double> grads) const {
  const std::size_t n_layers = sizes_.size() - 1;
  // delta holds d(loss)/d(pre-activation) of the current layer.
  std::vector<double> delta(grad_output.begin(), grad_output.end());
  std::vector<double> prev;
  for (std::size_t l = n_layers; l-- > 0;) {
    const std::size_t in = sizes_[l];
    const std::size_t out = sizes_[l + 1];
    const double* w = params.data() + weight_offset(l);
    double* gw = grads.data() + weight_offset(l);
    double* gb = grads.data() + bias_offset(l);
    const auto& x = tape.layers[l];
    for (std::size_t o = 0; o < out; ++o) {
      const double d = delta[o];
      gb[o] += d;
      double* grow = gw + o * in;
      for (std::size_t i = 0; i < in; ++i) grow[i] += d * x[i];
    }
    if (l == 0) break;
    prev.assign(in, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      const double d = delta[o];
      const double* row = w + o * in;
      for (std::size_t i = 0; i < in; ++i) prev[i] += row[i] * d;
    }
    // x is tanh(pre-activation) for every hidden layer.
    for (std::size_t i = 0; i < in; ++i) prev[i] *= 1.0 - x[i] * x[i];
    delta.swap(prev);
  }
}

void Mlp::init_orthogonal(std::span<double> params, double hidden_gain, double output_gain,
                          Rng& rng) const {
  const std::size_t n_layers = sizes_.size() - 1;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const std::size_t in = sizes_[l];
    const std::size_t out = sizes_[l + 1];
    const double gain = l + 1 < n_layers ? hidden_gain : output_gain;
    fill_orthogonal(params.subspan(weight_offset(l), out * in), out, in, gain, rng);
    for (std::size_t o = 0; o < out; ++o) params[bias_offset(l) + o] = 0.0;
  }
}

void fill_orthogonal(std::span<double> matrix, std::size_t rows, std::size_t cols, double gain,
                     Rng& rng) {
  // Orthonormalize the columns of a tall Gaussian matrix (modified
  // Gram-Schmidt), transposing for wide shapes.
  const bool wide = rows < cols;
  const std::size_t tall = wide ? cols : rows;
  const std::size_t narrow = wide ? rows : cols;
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> q(tall * narrow);  // column-major: column c at q[c * tall]
  for (auto& v : q) v = normal(rng);

  for (std::size_t c = 0; c < narrow; ++c) {
    double* col = q.data() + c * tall;
    for (std::size_t p = 0; p < c; ++p) {
      const double* basis = q.data() + p * tall;
      double dot = 0.0;
      for (std::size_t r = 0; r < tall; ++r) dot += basis[r] * col[r];
      for (std::size_t r = 0; r < tall; ++r) col[r] -= dot * basis[r];
    }
    double norm = 0.0;
    for (std::size_t r = 0; r < tall; ++r) norm += col[r] * col[r];
    norm = std::sqrt(norm);
    if (norm < 1e-12) throw std::runtime_error("fill_orthogonal: degenerate random draw");
    for (std::size_t r = 0; r < tall; ++r) col[r] /= norm;
  }

  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double v = wide ? q[r * tall + c] : q[c * tall + r];
      matrix[r * cols + c] = gain * v;
    }
  }
}

}  // namespace blueprint
