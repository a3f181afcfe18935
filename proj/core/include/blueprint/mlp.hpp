#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "blueprint/random.hpp"

namespace blueprint {

/// Fully connected tanh network with a linear output layer.
///
/// An Mlp only describes shapes; its weights live in an external flat
/// parameter buffer starting at offset(). Layer l stores a row-major
/// [out x in] weight block followed by [out] biases. Keeping every
/// parameter of a model in one buffer makes the optimizer, gradient
/// clipping, checkpointing and finite-difference checks operate on a
/// single vector.
class Mlp {
 public:
  /// Activations recorded by forward() and consumed by backward().
  struct Tape {
    // layers[0] is the input, layers.back() the (linear) output.
    std::vector<std::vector<double>> layers;
  };

  Mlp() = default;
  /// `sizes` lists the input width, every hidden width and the output width.
  Mlp(std::vector<std::size_t> sizes, std::size_t offset);

  std::size_t offset() const { return offset_; }
  std::size_t parameter_count() const { return count_; }
  std::size_t input_size() const { return sizes_.front(); }
  std::size_t output_size() const { return sizes_.back(); }
  const std::vector<std::size_t>& sizes() const { return sizes_; }

  void forward(std::span<const double> params, std::span<const double> input, Tape& tape) const;
  std::vector<double> forward(std::span<const double> params, std::span<const double> input) const;

  /// Accumulates d(loss)/d(params) into `grads` (same layout as `params`)
  /// given d(loss)/d(output) for the pass recorded in `tape`.
  void backward(std::span<const double> params, const Tape& tape,
                std::span<const double> grad_output, std::span<double> grads) const;

  /// Orthogonal weights (gain `hidden_gain` for hidden layers, `output_gain`
  /// for the last one) and zero biases.
  void init_orthogonal(std::span<double> params, double hidden_gain, double output_gain,
                       Rng& rng) const;

 private:
  std::size_t weight_offset(std::size_t layer) const { return layer_offsets_[layer]; }
  std::size_t bias_offset(std::size_t layer) const {
    return layer_offsets_[layer] + sizes_[layer] * sizes_[layer + 1];
  }

  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> layer_offsets_;
  std::size_t offset_ = 0;
  std::size_t count_ = 0;
};

/// Fills a row-major rows x cols matrix with a (semi-)orthogonal matrix
/// scaled by `gain`.
void fill_orthogonal(std::span<double> matrix, std::size_t rows, std::size_t cols, double gain,
                     Rng& rng);

}  // namespace blueprint
