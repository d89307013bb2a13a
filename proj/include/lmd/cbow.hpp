#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lmd/embedding_io.hpp"
#include "lmd/random.hpp"

namespace lmd {

struct CbowConfig {
  std::size_t dim = 64;
  std::size_t window = 5;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double initial_lr = 0.05;
  std::size_t min_count = 2;
  std::uint64_t seed = 1;
  double sampling_exponent = 0.75;

  // Throws ConfigError on any non-positive field.
  void validate() const;
};

// Lowercases, splits on Unicode whitespace and strips leading/trailing
// punctuation (.,;:!?"'()[] plus the Spanish openers ¿ and ¡) from each
// token. Empty tokens are dropped.
std::vector<std::string> tokenize(std::string_view line);

std::vector<std::string> read_lines(std::istream& in);

struct VocabCounts {
  Vocabulary vocab;
  std::vector<std::uint64_t> counts;  // parallel to vocab
};

// Tokens with frequency >= min_count, by descending frequency then ascending
// byte order. Throws InsufficientDataError when nothing survives.
VocabCounts build_vocab(std::span<const std::string> lines, std::size_t min_count);

// Cumulative frequency^alpha weights for negative sampling.
class UnigramTable {
 public:
  UnigramTable(std::span<const std::uint64_t> counts, double alpha);

  std::size_t size() const { return cumulative_.size(); }
  std::span<const double> cumulative() const { return cumulative_; }

  std::size_t sample(Rng& rng) const;

 private:
  std::vector<double> cumulative_;
};

inline std::size_t sample_negative(const UnigramTable& table, Rng& rng) { return table.sample(rng); }

struct CbowResult {
  EmbeddingSpace space;  // input-side vectors
  std::vector<std::uint64_t> counts;
  std::vector<double> epoch_loss;  // mean negative-sampling log-loss per example
};

using EpochCallback = std::function<void(std::size_t epoch, double mean_loss)>;

// Single-threaded CBOW with negative sampling. Each line is one sentence; the
// symmetric window is truncated at sentence boundaries and the context vector
// is the mean of the window's input vectors. Output is bit-identical for a
// given corpus and config.
CbowResult train_cbow(std::span<const std::string> lines, const CbowConfig& config,
                      const EpochCallback& on_epoch = {});

}  // namespace lmd
