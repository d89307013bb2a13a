#include "lmd/lexicon.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>

#include "lmd/error.hpp"
#include "lmd/random.hpp"

namespace lmd {

BilingualLexicon::BilingualLexicon(std::vector<LexiconPair> pairs) : pairs_(std::move(pairs)) {
  std::set<LexiconPair> seen;
  for (const auto& p : pairs_) {
    if (!valid_token(p.source) || !valid_token(p.target))
      throw FormatError("lexicon tokens must be non-empty and whitespace-free: '" + p.source + "', '" + p.target + "'");
    if (!seen.insert(p).second) throw FormatError("duplicate lexicon pair (" + p.source + ", " + p.target + ")");
  }
}

BilingualLexicon read_lexicon(std::istream& in) {
  std::vector<LexiconPair> pairs;
  std::set<LexiconPair> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos)
      throw FormatError("expected '<source>\\t<target>'", line_no);
    LexiconPair p{line.substr(0, tab), line.substr(tab + 1)};
    if (!valid_token(p.source) || !valid_token(p.target))
      throw FormatError("empty or whitespace-containing token", line_no);
    if (!seen.insert(p).second)
      throw FormatError("duplicate pair (" + p.source + ", " + p.target + ")", line_no);
    pairs.push_back(std::move(p));
  }
  return BilingualLexicon(std::move(pairs));
}

BilingualLexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open lexicon file '" + path.string() + "'");
  try {
    return read_lexicon(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_lexicon(const BilingualLexicon& lex, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  for (const auto& p : lex) out << p.source << '\t' << p.target << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

FilterResult filter_by_vocab(const BilingualLexicon& lex, const EmbeddingSpace& src, const EmbeddingSpace& tgt) {
  std::vector<LexiconPair> kept;
  std::vector<DroppedPair> dropped;
  for (const auto& p : lex) {
    const bool src_oov = !src.vocab().contains(p.source);
    const bool tgt_oov = !tgt.vocab().contains(p.target);
    if (src_oov || tgt_oov)
      dropped.push_back({p, src_oov, tgt_oov});
    else
      kept.push_back(p);
  }
  return {BilingualLexicon(std::move(kept)), std::move(dropped)};
}

LexiconSplit split(const BilingualLexicon& lex, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ConfigError("train fraction must lie strictly between 0 and 1");
  const std::size_t m = lex.size();
  if (m < 2) throw InsufficientDataError("split needs at least 2 pairs, got " + std::to_string(m));
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(m)));
  if (n_train == 0 || n_train == m)
    throw InsufficientDataError("train fraction " + std::to_string(train_fraction) + " of " + std::to_string(m) +
                                " pairs leaves one side empty");

  Rng rng(seed);
  std::vector<std::size_t> order = rng.permutation(m);
  std::vector<bool> in_train(m, false);
  for (std::size_t i = 0; i < n_train; ++i) in_train[order[i]] = true;

  std::vector<LexiconPair> train;
  std::vector<LexiconPair> test;
  train.reserve(n_train);
  test.reserve(m - n_train);
  for (std::size_t i = 0; i < m; ++i) (in_train[i] ? train : test).push_back(lex[i]);
  return {BilingualLexicon(std::move(train)), BilingualLexicon(std::move(test))};
}

PairedMatrices to_matrices(const BilingualLexicon& lex, const EmbeddingSpace& src, const EmbeddingSpace& tgt) {
  PairedMatrices out{Matrix(lex.size(), src.dim()), Matrix(lex.size(), tgt.dim()), lex};
  for (std::size_t i = 0; i < lex.size(); ++i) {
    auto xs = src.lookup(lex[i].source);
    auto ys = tgt.lookup(lex[i].target);
    std::copy(xs.begin(), xs.end(), out.x.row(i).begin());
    std::copy(ys.begin(), ys.end(), out.y.row(i).begin());
  }
  return out;
}

}  // namespace lmd
