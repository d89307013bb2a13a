#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lmd/embedding_io.hpp"
#include "lmd/matrix.hpp"

namespace lmd {

// Read-only handle on a row-normalized target space: the language model that
// decides distances. It is shared, never copied, so a metric built on it can
// be called from inside a numeric training loop without touching the space.
// Zero rows are not candidates for any neighborhood.
class NeighborIndex {
 public:
  // Requires every non-zero row to have unit norm (within 1e-12).
  explicit NeighborIndex(std::shared_ptr<const EmbeddingSpace> normalized);

  // Normalizes a copy of `space` and indexes it.
  static NeighborIndex from_space(const EmbeddingSpace& space);

  const EmbeddingSpace& space() const { return *space_; }
  std::shared_ptr<const EmbeddingSpace> shared_space() const { return space_; }
  const std::vector<std::size_t>& excluded_rows() const { return excluded_; }
  std::size_t candidate_count() const { return space_->size() - excluded_.size(); }
  bool is_candidate(std::size_t row) const { return candidate_[row]; }

  // Cosine score of every vocabulary row against `query` (non-candidates get
  // -inf). Throws DegenerateVectorError for a zero query.
  std::vector<double> scores(std::span<const double> query) const;

 private:
  std::shared_ptr<const EmbeddingSpace> space_;
  std::vector<std::size_t> excluded_;
  std::vector<bool> candidate_;
};

struct Neighbor {
  std::size_t index;
  double score;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

// Top-min(k, candidates) rows by cosine score; ties by ascending index.
using NeighborSet = std::vector<Neighbor>;

NeighborSet knn(const NeighborIndex& index, std::span<const double> query, std::size_t k);

// 0-based position of `truth_row` in the full neighbor ordering of `query`;
// equals candidate_count() when the row is not a candidate.
std::size_t neighbor_rank(const NeighborIndex& index, std::span<const double> query, std::size_t truth_row);

// Language Model Distance: true iff `truth` is among the k nearest neighbors
// of `p_hat` in the indexed space.
bool lmd(const NeighborIndex& index, std::span<const double> p_hat, std::string_view truth, std::size_t k);

struct AccuracyReport {
  std::map<std::size_t, double> accuracy;  // k -> fraction in [0, 1]
  std::size_t rows = 0;
  std::vector<std::size_t> degenerate_rows;  // zero predictions, scored as misses
};

// LMD_Accuracy for every k in `ks` in one pass. Rows may be scored on up to
// `workers` threads; per-row results are reduced in row order, so the output
// does not depend on the worker count.
AccuracyReport lmd_accuracy(const NeighborIndex& index, const Matrix& predictions,
                            std::span<const std::string> truths, std::span<const std::size_t> ks,
                            std::size_t workers = 1);

double lmd_accuracy(const NeighborIndex& index, const Matrix& predictions, std::span<const std::string> truths,
                    std::size_t k, std::size_t workers = 1);

struct MeanCosineReport {
  double mean = 0.0;
  std::size_t used = 0;
  std::vector<std::size_t> skipped_rows;  // zero-norm prediction or truth
};

// Mean row-wise cosine similarity, summed in row order.
MeanCosineReport mean_cosine(const Matrix& predictions, const Matrix& truths);

struct SeriesPoint {
  double x;
  double y;
};

// OLS slope of each window of consecutive points; output length
// series.size() - window + 1. x must be strictly increasing.
std::vector<double> rolling_ols_slope(std::span<const SeriesPoint> series, std::size_t window);

// One row of an experiment curve.
struct MetricRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double mean_cosine = 0.0;
  std::map<std::size_t, double> lmd_acc;
};

}  // namespace lmd
