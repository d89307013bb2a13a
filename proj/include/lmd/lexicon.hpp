#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "lmd/embedding_io.hpp"
#include "lmd/matrix.hpp"

namespace lmd {

struct LexiconPair {
  std::string source;
  std::string target;

  friend bool operator==(const LexiconPair&, const LexiconPair&) = default;
  friend auto operator<=>(const LexiconPair&, const LexiconPair&) = default;
};

// Ordered translation pairs. A source may map to several targets; an exact
// (source, target) repeat is rejected.
class BilingualLexicon {
 public:
  BilingualLexicon() = default;
  explicit BilingualLexicon(std::vector<LexiconPair> pairs);

  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  const LexiconPair& operator[](std::size_t i) const { return pairs_[i]; }
  const std::vector<LexiconPair>& pairs() const { return pairs_; }

  auto begin() const { return pairs_.begin(); }
  auto end() const { return pairs_.end(); }

  friend bool operator==(const BilingualLexicon&, const BilingualLexicon&) = default;

 private:
  std::vector<LexiconPair> pairs_;
};

// "<src>\t<tgt>" per line; blank lines and lines starting with '#' skipped.
BilingualLexicon read_lexicon(std::istream& in);
BilingualLexicon load_lexicon(const std::filesystem::path& path);
void save_lexicon(const BilingualLexicon& lex, const std::filesystem::path& path);

struct DroppedPair {
  LexiconPair pair;
  bool source_oov = false;
  bool target_oov = false;
};

struct FilterResult {
  BilingualLexicon kept;
  std::vector<DroppedPair> dropped;
};

FilterResult filter_by_vocab(const BilingualLexicon& lex, const EmbeddingSpace& src, const EmbeddingSpace& tgt);

struct LexiconSplit {
  BilingualLexicon train;
  BilingualLexicon test;
};

// Seeded shuffle, first round(train_fraction * m) pairs to train. Both sides
// keep the lexicon's original relative order.
LexiconSplit split(const BilingualLexicon& lex, double train_fraction, std::uint64_t seed);

struct PairedMatrices {
  Matrix x;  // m x d_src
  Matrix y;  // m x d_tgt
  BilingualLexicon kept_pairs;

  std::size_t size() const { return x.rows(); }
};

// Throws OovError if any pair is out of vocabulary; run filter_by_vocab first.
PairedMatrices to_matrices(const BilingualLexicon& lex, const EmbeddingSpace& src, const EmbeddingSpace& tgt);

}  // namespace lmd
