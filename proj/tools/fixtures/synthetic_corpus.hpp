#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "lmd/lexicon.hpp"

namespace lmd::fixtures {

// Stand-in for a sentence-aligned parallel corpus. Both sides realize the same
// sequence of lexicon concepts, so their co-occurrence statistics match, but
// each side gets its own function words and the source side its own local
// word-order noise; two embedding spaces trained on them are related by an
// approximately linear map without being copies of one another.
struct ParallelCorpusConfig {
  std::size_t sentences = 6000;
  std::size_t min_length = 8;   // concept tokens per sentence
  std::size_t max_length = 14;
  std::size_t topics = 24;
  std::size_t associates = 3;   // fixed collocates per concept
  double associate_prob = 0.55;
  double topic_prob = 0.30;     // remainder: any concept by global frequency
  double source_swap_prob = 0.15;
  double source_substitute_prob = 0.2;  // free translation: a same-topic concept instead
  double source_function_prob = 0.35;
  double target_function_prob = 0.30;
  std::uint64_t seed = 2020;
};

struct ParallelCorpus {
  std::vector<std::string> source;  // lexicon source language, one sentence per line
  std::vector<std::string> target;
};

ParallelCorpus make_parallel_corpus(const BilingualLexicon& lex, const ParallelCorpusConfig& config);

// Lines built from `pairs` token pairs ("p<i>a p<i>b"). Each line holds
// `pairs_per_line` distinct pairs, each as a contiguous block with both tokens
// repeated `repeats` times in shuffled order, so partners always co-occur and
// see the same local contexts.
std::vector<std::string> make_cooccurrence_corpus(std::size_t pairs, std::size_t lines, std::size_t pairs_per_line,
                                                  std::size_t repeats, std::uint64_t seed);

}  // namespace lmd::fixtures
