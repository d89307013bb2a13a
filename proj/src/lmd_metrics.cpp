#include "lmd/lmd_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "lmd/error.hpp"

namespace lmd {

namespace {

constexpr double kUnitTolerance = 1e-12;
constexpr std::size_t kNotFound = std::numeric_limits<std::size_t>::max();

// Neighbor ordering: higher score first, then lower index.
bool ranks_before(double score_a, std::size_t a, double score_b, std::size_t b) {
  return score_a > score_b || (score_a == score_b && a < b);
}

}  // namespace

NeighborIndex::NeighborIndex(std::shared_ptr<const EmbeddingSpace> normalized) : space_(std::move(normalized)) {
  if (!space_) throw Error("NeighborIndex: null space");
  candidate_.assign(space_->size(), true);
  for (std::size_t i = 0; i < space_->size(); ++i) {
    const double n = norm2(space_->row(i));
    if (n == 0.0) {
      excluded_.push_back(i);
      candidate_[i] = false;
    } else if (std::abs(n - 1.0) > kUnitTolerance) {
      throw DimensionError("NeighborIndex: row " + std::to_string(i) + " ('" + space_->vocab().token(i) +
                           "') is not unit-norm; normalize the space first");
    }
  }
}

NeighborIndex NeighborIndex::from_space(const EmbeddingSpace& space) {
  return NeighborIndex(std::make_shared<const EmbeddingSpace>(normalize_rows(space).space));
}

std::vector<double> NeighborIndex::scores(std::span<const double> query) const {
  if (query.size() != space_->dim())
    throw DimensionError("query width " + std::to_string(query.size()) + " ≠ " + std::to_string(space_->dim()));
  if (!all_finite(query)) throw DegenerateVectorError("non-finite query vector");
  const double qn = norm2(query);
  if (qn == 0.0) throw DegenerateVectorError("zero query vector");
  std::vector<double> s(space_->size());
  for (std::size_t i = 0; i < s.size(); ++i)
    s[i] = candidate_[i] ? dot(space_->row(i), query) / qn : -std::numeric_limits<double>::infinity();
  return s;
}

NeighborSet knn(const NeighborIndex& index, std::span<const double> query, std::size_t k) {
  if (k < 1) throw ConfigError("knn: k must be >= 1");
  const std::vector<double> s = index.scores(query);
  std::vector<std::size_t> cand;
  cand.reserve(index.candidate_count());
  for (std::size_t i = 0; i < s.size(); ++i)
    if (index.is_candidate(i)) cand.push_back(i);
  const std::size_t take = std::min(k, cand.size());
  auto before = [&](std::size_t a, std::size_t b) { return ranks_before(s[a], a, s[b], b); };
  std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(take), cand.end(), before);
  NeighborSet out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back({cand[i], s[cand[i]]});
  return out;
}

std::size_t neighbor_rank(const NeighborIndex& index, std::span<const double> query, std::size_t truth_row) {
  if (truth_row >= index.space().size()) throw DimensionError("neighbor_rank: row out of range");
  if (!index.is_candidate(truth_row)) {
    index.scores(query);  // still validate the query
    return index.candidate_count();
  }
  const std::vector<double> s = index.scores(query);
  const double st = s[truth_row];
  std::size_t rank = 0;
  for (std::size_t j = 0; j < s.size(); ++j)
    if (index.is_candidate(j) && ranks_before(s[j], j, st, truth_row)) ++rank;
  return rank;
}

bool lmd(const NeighborIndex& index, std::span<const double> p_hat, std::string_view truth, std::size_t k) {
  const auto t = index.space().vocab().find(truth);
  if (!t) throw OovError(std::string(truth));
  const NeighborSet set = knn(index, p_hat, k);
  return std::any_of(set.begin(), set.end(), [&](const Neighbor& n) { return n.index == *t; });
}

AccuracyReport lmd_accuracy(const NeighborIndex& index, const Matrix& predictions,
                            std::span<const std::string> truths, std::span<const std::size_t> ks,
                            std::size_t workers) {
  if (predictions.rows() != truths.size())
    throw DimensionError("lmd_accuracy: " + std::to_string(predictions.rows()) + " predictions but " +
                         std::to_string(truths.size()) + " truths");
  if (predictions.rows() == 0) throw InsufficientDataError("lmd_accuracy: empty input");
  if (predictions.cols() != index.space().dim())
    throw DimensionError("lmd_accuracy: prediction width " + std::to_string(predictions.cols()) + " ≠ " +
                         std::to_string(index.space().dim()));
  if (!all_finite(predictions.data())) throw DegenerateVectorError("lmd_accuracy: non-finite prediction");
  if (ks.empty()) throw ConfigError("lmd_accuracy: no k values");
  for (std::size_t k : ks)
    if (k < 1) throw ConfigError("lmd_accuracy: k must be >= 1");

  const std::size_t n = predictions.rows();
  std::vector<std::size_t> truth_rows(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto t = index.space().vocab().find(truths[r]);
    if (!t) throw OovError(truths[r]);
    truth_rows[r] = *t;
  }

  std::vector<std::size_t> ranks(n, kNotFound);
  auto score_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      auto p = predictions.row(r);
      if (std::all_of(p.begin(), p.end(), [](double v) { return v == 0.0; })) continue;
      ranks[r] = neighbor_rank(index, p, truth_rows[r]);
    }
  };

  workers = std::clamp<std::size_t>(workers, 1, n);
  if (workers == 1) {
    score_range(0, n);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t begin = 0; begin < n; begin += chunk)
      pool.emplace_back(score_range, begin, std::min(n, begin + chunk));
  }

  AccuracyReport report;
  report.rows = n;
  for (std::size_t r = 0; r < n; ++r)
    if (ranks[r] == kNotFound) report.degenerate_rows.push_back(r);
  for (std::size_t k : ks) {
    std::size_t hits = 0;
    for (std::size_t r = 0; r < n; ++r)
      if (ranks[r] != kNotFound && ranks[r] < k) ++hits;
    report.accuracy[k] = static_cast<double>(hits) / static_cast<double>(n);
  }
  return report;
}

double lmd_accuracy(const NeighborIndex& index, const Matrix& predictions, std::span<const std::string> truths,
                    std::size_t k, std::size_t workers) {
  const std::size_t ks[] = {k};
  return lmd_accuracy(index, predictions, truths, ks, workers).accuracy.at(k);
}

MeanCosineReport mean_cosine(const Matrix& predictions, const Matrix& truths) {
  if (predictions.rows() != truths.rows() || predictions.cols() != truths.cols())
    throw DimensionError("mean_cosine: shape mismatch");
  MeanCosineReport report;
  double sum = 0.0;
  for (std::size_t r = 0; r < predictions.rows(); ++r) {
    auto p = predictions.row(r);
    auto t = truths.row(r);
    const double pp = dot(p, p);
    const double tt = dot(t, t);
    if (pp == 0.0 || tt == 0.0) {
      report.skipped_rows.push_back(r);
      continue;
    }
    // sqrt(pp * tt) is exactly dot(p, p) when p == t, so identical rows score 1.
    sum += std::clamp(dot(p, t) / std::sqrt(pp * tt), -1.0, 1.0);
    ++report.used;
  }
  if (report.used == 0) throw InsufficientDataError("mean_cosine: no non-degenerate rows");
  report.mean = sum / static_cast<double>(report.used);
  return report;
}

std::vector<double> rolling_ols_slope(std::span<const SeriesPoint> series, std::size_t window) {
  if (window < 2) throw ConfigError("rolling_ols_slope: window must be >= 2");
  if (series.size() < window)
    throw InsufficientDataError("rolling_ols_slope: window " + std::to_string(window) + " exceeds series length " +
                                std::to_string(series.size()));
  for (std::size_t i = 1; i < series.size(); ++i)
    if (!(series[i].x > series[i - 1].x)) throw ConfigError("rolling_ols_slope: x must be strictly increasing");

  std::vector<double> slopes;
  slopes.reserve(series.size() - window + 1);
  for (std::size_t start = 0; start + window <= series.size(); ++start) {
    auto w = series.subspan(start, window);
    double mx = 0.0;
    double my = 0.0;
    for (const auto& p : w) {
      mx += p.x;
      my += p.y;
    }
    mx /= static_cast<double>(window);
    my /= static_cast<double>(window);
    double sxy = 0.0;
    double sxx = 0.0;
    for (const auto& p : w) {
      sxy += (p.x - mx) * (p.y - my);
      sxx += (p.x - mx) * (p.x - mx);
    }
    if (sxx == 0.0) throw DegenerateVectorError("rolling_ols_slope: zero variance in x");
    slopes.push_back(sxy / sxx);
  }
  return slopes;
}

}  // namespace lmd
