#include "synthetic_corpus.hpp"

#include <algorithm>
#include <cmath>

#include "lmd/error.hpp"
#include "lmd/random.hpp"

namespace lmd::fixtures {

namespace {

const std::vector<std::string> kSpanishFunctionWords = {"el", "la", "los", "las", "de", "que", "y", "en", "un",
                                                        "una", "por", "con", "para", "se", "del", "al", "lo", "muy"};
const std::vector<std::string> kEnglishFunctionWords = {"the", "of", "and", "to", "a", "in", "that", "is",
                                                        "for", "it", "with", "as", "on", "by", "this", "very"};

std::size_t pick_weighted(const std::vector<double>& cumulative, Rng& rng) {
  const double u = rng.uniform01() * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  if (it == cumulative.end()) --it;
  return static_cast<std::size_t>(it - cumulative.begin());
}

std::string capitalize_first_ascii(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

std::string render(const std::vector<std::string>& words) {
  std::string line;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) line += ' ';
    line += i == 0 ? capitalize_first_ascii(words[i]) : words[i];
  }
  line += '.';
  return line;
}

}  // namespace

ParallelCorpus make_parallel_corpus(const BilingualLexicon& lex, const ParallelCorpusConfig& config) {
  const std::size_t n = lex.size();
  if (n < 2) throw InsufficientDataError("parallel corpus needs at least 2 lexicon pairs");
  if (config.min_length < 1 || config.max_length < config.min_length) throw ConfigError("bad sentence lengths");
  const std::size_t topics = std::clamp<std::size_t>(config.topics, 1, n);

  Rng structure(mix_seed(config.seed, 1));
  // Zipf-like global frequency over a random concept ranking.
  const std::vector<std::size_t> rank = structure.permutation(n);
  std::vector<double> weight(n);
  for (std::size_t r = 0; r < n; ++r) weight[rank[r]] = 1.0 / std::pow(static_cast<double>(r) + 10.0, 0.7);

  // Round-robin topic assignment over a second permutation.
  const std::vector<std::size_t> topic_order = structure.permutation(n);
  std::vector<std::size_t> topic_of(n);
  std::vector<std::vector<std::size_t>> members(topics);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = topic_order[i];
    topic_of[c] = i % topics;
    members[i % topics].push_back(c);
  }
  std::vector<std::vector<double>> topic_cum(topics);
  for (std::size_t t = 0; t < topics; ++t) {
    double acc = 0.0;
    for (std::size_t c : members[t]) topic_cum[t].push_back(acc += weight[c]);
  }
  std::vector<double> global_cum(n);
  {
    double acc = 0.0;
    for (std::size_t c = 0; c < n; ++c) global_cum[c] = acc += weight[c];
  }

  std::vector<std::vector<std::size_t>> associates(n);
  for (std::size_t c = 0; c < n; ++c) {
    const auto& pool = members[topic_of[c]];
    if (pool.size() < 2) continue;
    for (std::size_t a = 0; a < config.associates; ++a) {
      std::size_t pick = c;
      while (pick == c) pick = pool[structure.below(pool.size())];
      associates[c].push_back(pick);
    }
  }

  Rng concepts(mix_seed(config.seed, 2));
  Rng src_noise(mix_seed(config.seed, 3));
  Rng tgt_noise(mix_seed(config.seed, 4));

  ParallelCorpus out;
  out.source.reserve(config.sentences);
  out.target.reserve(config.sentences);
  std::vector<std::size_t> seq;
  for (std::size_t s = 0; s < config.sentences; ++s) {
    const std::size_t len =
        config.min_length + static_cast<std::size_t>(concepts.below(config.max_length - config.min_length + 1));
    seq.clear();
    seq.push_back(pick_weighted(global_cum, concepts));
    while (seq.size() < len) {
      const std::size_t cur = seq.back();
      const double r = concepts.uniform01();
      std::size_t next;
      if (r < config.associate_prob && !associates[cur].empty()) {
        next = associates[cur][concepts.below(associates[cur].size())];
      } else if (r < config.associate_prob + config.topic_prob) {
        const std::size_t t = topic_of[cur];
        next = members[t][pick_weighted(topic_cum[t], concepts)];
      } else {
        next = pick_weighted(global_cum, concepts);
      }
      seq.push_back(next);
    }

    std::vector<std::string> tgt_words;
    for (std::size_t c : seq) {
      if (tgt_noise.uniform01() < config.target_function_prob)
        tgt_words.push_back(kEnglishFunctionWords[tgt_noise.below(kEnglishFunctionWords.size())]);
      tgt_words.push_back(lex[c].target);
    }

    std::vector<std::size_t> src_seq = seq;
    for (std::size_t& c : src_seq) {
      if (src_noise.uniform01() < config.source_substitute_prob) {
        const auto& pool = members[topic_of[c]];
        c = pool[src_noise.below(pool.size())];
      }
    }
    for (std::size_t i = 0; i + 1 < src_seq.size(); ++i)
      if (src_noise.uniform01() < config.source_swap_prob) std::swap(src_seq[i], src_seq[i + 1]);
    std::vector<std::string> src_words;
    for (std::size_t c : src_seq) {
      if (src_noise.uniform01() < config.source_function_prob)
        src_words.push_back(kSpanishFunctionWords[src_noise.below(kSpanishFunctionWords.size())]);
      src_words.push_back(lex[c].source);
    }

    out.source.push_back(render(src_words));
    out.target.push_back(render(tgt_words));
  }
  return out;
}

std::vector<std::string> make_cooccurrence_corpus(std::size_t pairs, std::size_t lines, std::size_t pairs_per_line,
                                                  std::size_t repeats, std::uint64_t seed) {
  if (pairs < 1 || pairs_per_line < 1 || pairs_per_line > pairs || repeats < 1)
    throw ConfigError("bad co-occurrence corpus shape");
  Rng rng(seed);
  std::vector<std::string> out;
  out.reserve(lines);
  for (std::size_t l = 0; l < lines; ++l) {
    const std::vector<std::size_t> order = rng.permutation(pairs);
    std::string line;
    for (std::size_t i = 0; i < pairs_per_line; ++i) {
      const std::string id = std::to_string(order[i]);
      std::vector<std::string> block;
      for (std::size_t r = 0; r < repeats; ++r) {
        block.push_back("p" + id + "a");
        block.push_back("p" + id + "b");
      }
      rng.shuffle(std::span<std::string>(block));
      for (const auto& tok : block) {
        if (!line.empty()) line += ' ';
        line += tok;
      }
    }
    out.push_back(std::move(line));
  }
  return out;
}

}  // namespace lmd::fixtures
