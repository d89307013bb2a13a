#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lmd/matrix.hpp"

namespace lmd {

// Ordered list of distinct, whitespace-free tokens with O(1) reverse lookup.
// Tokens compare byte-exact and case-sensitive.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  const std::string& token(std::size_t i) const { return tokens_[i]; }
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::optional<std::size_t> find(std::string_view token) const;
  bool contains(std::string_view token) const { return find(token).has_value(); }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
  };
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t, Hash, std::equal_to<>> index_;
};

// True when the token is non-empty and free of ASCII whitespace.
bool valid_token(std::string_view token);

// A vocabulary plus its n x d matrix; row i is the vector of token i.
// Immutable after construction, so one instance can be read from any number
// of evaluation threads.
class EmbeddingSpace {
 public:
  EmbeddingSpace(Vocabulary vocab, Matrix matrix);
  // Empty space of a given width (d >= 1).
  explicit EmbeddingSpace(std::size_t dim);

  const Vocabulary& vocab() const { return vocab_; }
  const Matrix& matrix() const { return matrix_; }
  std::size_t dim() const { return matrix_.cols(); }
  std::size_t size() const { return vocab_.size(); }

  std::span<const double> row(std::size_t i) const { return matrix_.row(i); }

  // Row for `token`; throws OovError when absent.
  std::span<const double> lookup(std::string_view token) const;

  friend bool operator==(const EmbeddingSpace& a, const EmbeddingSpace& b) {
    return a.vocab_ == b.vocab_ && a.matrix_ == b.matrix_;
  }

 private:
  Vocabulary vocab_;
  Matrix matrix_;
};

// word2vec text format: header "<n> <d>" then n lines "<token> <v1> ... <vd>".
EmbeddingSpace read_word2vec_text(std::istream& in);
EmbeddingSpace load_word2vec_text(const std::filesystem::path& path);

// Values are written with 17 significant digits, which round-trips doubles.
void write_word2vec_text(const EmbeddingSpace& space, std::ostream& out);
void save_word2vec_text(const EmbeddingSpace& space, const std::filesystem::path& path);

struct NormalizedSpace {
  EmbeddingSpace space;
  std::vector<std::size_t> zero_rows;  // left as zero, one warning each
};

// Scales every non-zero row to unit L2 norm. Rows already within 1e-13 of
// unit norm are left bit-for-bit untouched, which makes the operation
// idempotent.
NormalizedSpace normalize_rows(const EmbeddingSpace& space);

}  // namespace lmd
