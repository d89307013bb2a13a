#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "lmd/matrix.hpp"

namespace lmd {

struct MapperConfig {
  std::size_t d_in = 64;
  std::size_t d_out = 64;
  std::size_t hidden = 256;  // 0 selects a single linear map
  double lr = 0.05;
  std::size_t batch_size = 32;
  std::size_t epochs = 200;
  std::uint64_t seed = 1;

  void validate() const;
};

// Bias-free map from source to target vectors: x W for the linear form,
// tanh(x W1) W2 for the one-hidden-layer form.
class Mapper {
 public:
  // Weights drawn uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)].
  explicit Mapper(const MapperConfig& config);
  // Adopts explicit weights: one matrix (linear) or two (hidden layer).
  explicit Mapper(std::vector<Matrix> layers);

  std::size_t d_in() const { return layers_.front().rows(); }
  std::size_t d_out() const { return layers_.back().cols(); }
  std::size_t hidden() const { return layers_.size() == 2 ? layers_[0].cols() : 0; }
  bool is_linear() const { return layers_.size() == 1; }

  const std::vector<Matrix>& layers() const { return layers_; }
  std::vector<Matrix>& layers() { return layers_; }

  std::vector<double> forward(std::span<const double> x) const;
  Matrix forward(const Matrix& x) const;

  friend bool operator==(const Mapper&, const Mapper&) = default;

 private:
  std::vector<Matrix> layers_;
};

inline Mapper init_mapper(const MapperConfig& config) { return Mapper(config); }

// 1 - cos(y_hat, y), in [0, 2]. Throws DegenerateVectorError on a zero vector.
double cosine_loss(std::span<const double> y_hat, std::span<const double> y);

// d(cosine_loss)/d(y_hat). Same preconditions as cosine_loss.
std::vector<double> cosine_loss_gradient(std::span<const double> y_hat, std::span<const double> y);

struct Gradients {
  std::vector<Matrix> layers;  // same shapes as Mapper::layers()
  double mean_loss = 0.0;      // over used samples
  std::size_t used = 0;
  std::size_t skipped = 0;     // zero-norm prediction or target
};

// Gradient of the mean cosine loss over the rows of (x, y). Degenerate rows
// are skipped and counted, never regularized with an epsilon.
Gradients gradient(const Mapper& m, const Matrix& x, const Matrix& y);

struct EpochReport {
  double mean_loss = 0.0;
  std::size_t used = 0;
  std::size_t skipped = 0;
};

// One pass of plain minibatch SGD (w <- w - lr * g). Rows are visited in an
// order shuffled from (config.seed, epoch_index). The reported loss is the
// mean per-sample loss measured before each batch's update. Throws
// InsufficientDataError if every row is degenerate.
EpochReport train_epoch(Mapper& m, const Matrix& x, const Matrix& y, const MapperConfig& config,
                        std::size_t epoch_index);

// Max element-wise relative error |a - n| / max(1e-12, |a| + |n|) between
// analytic and central-difference gradients of the loss on one sample.
double grad_check(const Mapper& m, std::span<const double> x, std::span<const double> y, double epsilon);
// Same, but checks a caller-supplied analytic gradient.
double grad_check(const Mapper& m, std::span<const double> x, std::span<const double> y, double epsilon,
                  const std::vector<Matrix>& analytic);

// Checkpoint text format:
//   line 1: "mapper <layer count>"
//   line 2: "<rows>x<cols>" for each layer, space separated
//   then every row of every layer as "<label> v1 ... vn" (label "w<layer>_<row>"),
//   values with 17 significant digits.
void write_mapper(const Mapper& m, std::ostream& out);
void save_mapper(const Mapper& m, const std::filesystem::path& path);
Mapper read_mapper(std::istream& in);
Mapper load_mapper(const std::filesystem::path& path);

}  // namespace lmd
