// Writes a deterministic synthetic parallel corpus for a lexicon:
//   lmd-make-fixtures --lexicon data/lexicon_es_en.tsv --out-src es.txt --out-tgt en.txt
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "fixtures/synthetic_corpus.hpp"
#include "lmd/error.hpp"
#include "lmd/lexicon.hpp"

namespace {

void write_lines(const std::vector<std::string>& lines, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw lmd::IoError("cannot open '" + path + "' for writing");
  for (const auto& l : lines) out << l << '\n';
  if (!out) throw lmd::IoError("write failed for '" + path + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic sentence-aligned corpus from a bilingual lexicon"};
  std::string lexicon;
  std::string out_src;
  std::string out_tgt;
  lmd::fixtures::ParallelCorpusConfig cfg;
  app.add_option("--lexicon", lexicon, "Tab-separated lexicon")->required();
  app.add_option("--out-src", out_src, "Source-language corpus output")->required();
  app.add_option("--out-tgt", out_tgt, "Target-language corpus output")->required();
  app.add_option("--sentences", cfg.sentences, "Sentence count")->capture_default_str();
  app.add_option("--substitute", cfg.source_substitute_prob, "Source-side same-topic substitution rate")
      ->capture_default_str();
  app.add_option("--swap", cfg.source_swap_prob, "Source-side adjacent swap rate")->capture_default_str();
  app.add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    const auto corpus = lmd::fixtures::make_parallel_corpus(lmd::load_lexicon(lexicon), cfg);
    write_lines(corpus.source, out_src);
    write_lines(corpus.target, out_tgt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  std::cout << cfg.sentences << " sentence pairs -> " << out_src << ", " << out_tgt << '\n';
  return 0;
}
