#include "lmd/embedding_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include "lmd/error.hpp"

namespace lmd {

namespace {

constexpr double kUnitTolerance = 1e-13;

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    if (i == line.size()) break;
    std::size_t j = i;
    while (j < line.size() && !is_space(line[j])) ++j;
    fields.push_back(line.substr(i, j - i));
    i = j;
  }
  return fields;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace

bool valid_token(std::string_view token) {
  if (token.empty()) return false;
  for (char c : token)
    if (is_space(c)) return false;
  return true;
}

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  index_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!valid_token(tokens_[i])) throw FormatError("invalid token '" + tokens_[i] + "'");
    if (!index_.emplace(tokens_[i], i).second)
      throw FormatError("duplicate token '" + tokens_[i] + "'");
  }
}

std::optional<std::size_t> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

EmbeddingSpace::EmbeddingSpace(Vocabulary vocab, Matrix matrix)
    : vocab_(std::move(vocab)), matrix_(std::move(matrix)) {
  if (matrix_.rows() != vocab_.size())
    throw DimensionError("matrix has " + std::to_string(matrix_.rows()) + " rows for " +
                         std::to_string(vocab_.size()) + " tokens");
  if (matrix_.cols() < 1) throw DimensionError("embedding dimension must be at least 1");
  if (!all_finite(matrix_.data())) throw FormatError("embedding matrix has non-finite entries");
}

EmbeddingSpace::EmbeddingSpace(std::size_t dim) : matrix_(0, dim) {
  if (dim < 1) throw DimensionError("embedding dimension must be at least 1");
}

std::span<const double> EmbeddingSpace::lookup(std::string_view token) const {
  auto idx = vocab_.find(token);
  if (!idx) throw OovError(std::string(token));
  return matrix_.row(*idx);
}

EmbeddingSpace read_word2vec_text(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("missing header", 1);
  auto header = split_fields(strip_cr(line));
  std::size_t n = 0;
  std::size_t d = 0;
  if (header.size() != 2 || !parse_number(header[0], n) || !parse_number(header[1], d) || d == 0)
    throw FormatError("malformed header '" + line + "', expected '<count> <dim>'", 1);

  std::vector<std::string> tokens;
  tokens.reserve(n);
  Matrix matrix(n, d);
  std::unordered_map<std::string, std::size_t> seen;
  std::size_t line_no = 1;
  for (std::size_t r = 0; r < n; ++r) {
    ++line_no;
    if (!std::getline(in, line))
      throw FormatError("expected " + std::to_string(n) + " rows, found " + std::to_string(r), line_no);
    auto fields = split_fields(strip_cr(line));
    if (fields.empty()) throw FormatError("empty row", line_no);
    const std::size_t width = fields.size() - 1;
    if (width != d)
      throw FormatError("row width " + std::to_string(width) + " ≠ " + std::to_string(d), line_no);
    std::string token(fields[0]);
    if (auto [it, fresh] = seen.emplace(token, line_no); !fresh)
      throw FormatError("duplicate token '" + token + "' (first at line " + std::to_string(it->second) + ")",
                        line_no);
    auto row = matrix.row(r);
    for (std::size_t c = 0; c < d; ++c) {
      double v = 0.0;
      if (!parse_number(fields[c + 1], v))
        throw FormatError("unparsable value '" + std::string(fields[c + 1]) + "'", line_no);
      if (!std::isfinite(v)) throw FormatError("non-finite value '" + std::string(fields[c + 1]) + "'", line_no);
      row[c] = v;
    }
    tokens.push_back(std::move(token));
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (!split_fields(line).empty())
      throw FormatError("unexpected content after " + std::to_string(n) + " rows", line_no);
  }
  return EmbeddingSpace(Vocabulary(std::move(tokens)), std::move(matrix));
}

EmbeddingSpace load_word2vec_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embedding file '" + path.string() + "'");
  try {
    return read_word2vec_text(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_word2vec_text(const EmbeddingSpace& space, std::ostream& out) {
  out << space.size() << ' ' << space.dim() << '\n';
  char buf[32];
  for (std::size_t i = 0; i < space.size(); ++i) {
    out << space.vocab().token(i);
    for (double v : space.row(i)) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << ' ' << buf;
    }
    out << '\n';
  }
}

void save_word2vec_text(const EmbeddingSpace& space, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_word2vec_text(space, out);
  out.flush();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

NormalizedSpace normalize_rows(const EmbeddingSpace& space) {
  Matrix m = space.matrix();
  std::vector<std::size_t> zero_rows;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto row = m.row(i);
    const double n = norm2(row);
    if (n == 0.0) {
      zero_rows.push_back(i);
      continue;
    }
    if (std::abs(n - 1.0) <= kUnitTolerance) continue;
    for (double& v : row) v /= n;
  }
  return {EmbeddingSpace(space.vocab(), std::move(m)), std::move(zero_rows)};
}

}  // namespace lmd
