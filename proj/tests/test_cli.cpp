#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lmd/embedding_io.hpp"
#include "lmd/experiments.hpp"
#include "lmd/lexicon.hpp"
#include "lmd/mapper.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int status;
  std::string output;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(LMD_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {-1, "popen failed"};
  std::string out;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
  const int raw = pclose(pipe);
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string quote(const fs::path& p) { return "'" + p.string() + "'"; }

class Cli : public ::testing::Test {
 protected:
  static fs::path dir;
  static fs::path es_vec;
  static fs::path en_vec;

  static void SetUpTestSuite() {
    dir = fs::temp_directory_path() / "lmd_cli_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    es_vec = dir / "es.vec";
    en_vec = dir / "en.vec";
    const std::string data = LMD_DATA_DIR;
    const std::string common = " --dim 16 --window 3 --epochs 3 --min-count 1";
    ASSERT_EQ(run("train-embeddings --corpus " + data + "/fixture_es.txt --out " + quote(es_vec) + common + " --seed 11")
                  .status,
              0);
    ASSERT_EQ(run("train-embeddings --corpus " + data + "/fixture_en.txt --out " + quote(en_vec) + common + " --seed 12")
                  .status,
              0);
  }

  static void TearDownTestSuite() { fs::remove_all(dir); }

  static std::string lexicon() { return std::string(LMD_DATA_DIR) + "/lexicon_es_en.tsv"; }
};

fs::path Cli::dir;
fs::path Cli::es_vec;
fs::path Cli::en_vec;

TEST_F(Cli, TrainEmbeddingsWritesLoadableFile) {
  const auto space = lmd::load_word2vec_text(es_vec);
  EXPECT_GT(space.size(), 300u);
  EXPECT_EQ(space.dim(), 16u);
}

TEST_F(Cli, TrainEmbeddingsIsReproducible) {
  const std::string corpus = std::string(LMD_DATA_DIR) + "/fixture_en.txt";
  const auto a = dir / "a.vec";
  const auto b = dir / "b.vec";
  const std::string flags = " --dim 16 --window 2 --epochs 5 --seed 7";
  const auto ra = run("train-embeddings --corpus " + corpus + " --out " + quote(a) + flags);
  ASSERT_EQ(ra.status, 0) << ra.output;
  EXPECT_NE(ra.output.find("epoch 5 loss"), std::string::npos);
  EXPECT_NE(ra.output.find("dim 16"), std::string::npos);
  ASSERT_EQ(run("train-embeddings --corpus " + corpus + " --out " + quote(b) + flags).status, 0);
  EXPECT_EQ(slurp(a), slurp(b));
}

TEST_F(Cli, MissingCorpusNamesPath) {
  const auto r = run("train-embeddings --corpus /no/such/corpus.txt --out " + quote(dir / "x.vec"));
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.output.find("/no/such/corpus.txt"), std::string::npos);
}

TEST_F(Cli, UnknownFlagIsUsageError) {
  EXPECT_EQ(run("train-embeddings --corpus a --out b --bogus 1").status, 1);
  EXPECT_EQ(run("").status, 1);
  EXPECT_EQ(run("frobnicate").status, 1);
}

TEST_F(Cli, ProcrustesSelfAlignment) {
  const auto space = lmd::load_word2vec_text(en_vec);
  std::vector<lmd::LexiconPair> self;
  for (const auto& t : space.vocab().tokens()) self.push_back({t, t});
  const auto lex = dir / "self.tsv";
  lmd::save_lexicon(lmd::BilingualLexicon(self), lex);
  const auto r = run("procrustes --src " + quote(en_vec) + " --tgt " + quote(en_vec) + " --lexicon " + quote(lex));
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_NE(r.output.find("lmd_acc@1 = 1.0000"), std::string::npos) << r.output;
  const auto pos = r.output.find("residual ");
  ASSERT_NE(pos, std::string::npos);
  EXPECT_LT(std::stod(r.output.substr(pos + 9)), 1e-9);
}

TEST_F(Cli, ProcrustesFixturesSavesLoadableMap) {
  const auto map = dir / "r.txt";
  const auto r = run("procrustes --src " + quote(es_vec) + " --tgt " + quote(en_vec) + " --lexicon " + lexicon() +
                     " --k 1,5 --save-map " + quote(map));
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_NE(r.output.find("lmd_acc@5"), std::string::npos);
  const auto m = lmd::load_mapper(map);
  EXPECT_TRUE(m.is_linear());
  EXPECT_EQ(m.d_in(), 16u);
}

TEST_F(Cli, ProcrustesMismatchedDims) {
  const auto narrow = dir / "narrow.vec";
  std::ofstream(narrow) << "2 3\ncasa 1 0 0\nhouse 0 1 0\n";
  const auto r = run("procrustes --src " + quote(es_vec) + " --tgt " + quote(narrow) + " --lexicon " + lexicon());
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.output.find("dim"), std::string::npos) << r.output;
}

TEST_F(Cli, ExperimentWritesCsvAndSvg) {
  const auto csv = dir / "in.csv";
  const auto svg = dir / "in.svg";
  const auto r = run("experiment --src " + quote(es_vec) + " --tgt " + quote(en_vec) + " --lexicon " + lexicon() +
                     " --mode in-sample --hidden 16 --epochs 4 --k 1,3,5 --log-every 0 --csv " + quote(csv) +
                     " --svg " + quote(svg));
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_NE(r.output.find("rolling OLS slope"), std::string::npos);
  const auto result = lmd::load_csv(csv);
  EXPECT_EQ(result.records.size(), 4u);
  EXPECT_EQ(result.config.ks, (std::vector<std::size_t>{1, 3, 5}));
  std::istringstream lines(slurp(csv));
  std::string header;
  std::getline(lines, header);
  EXPECT_EQ(header, "epoch,train_loss,mean_cosine,lmd_acc@1,lmd_acc@3,lmd_acc@5");
  EXPECT_NE(slurp(svg).find("<svg"), std::string::npos);
}

TEST_F(Cli, HeldOutIsDeterministic) {
  auto go = [&](const std::string& tag) {
    const auto r = run("experiment --src " + quote(es_vec) + " --tgt " + quote(en_vec) + " --lexicon " + lexicon() +
                       " --mode held-out --train-fraction 0.8 --seed 3 --hidden 8 --epochs 3 --log-every 0 --csv " +
                       quote(dir / (tag + ".csv")) + " --svg " + quote(dir / (tag + ".svg")));
    EXPECT_EQ(r.status, 0) << r.output;
    return slurp(dir / (tag + ".csv")) + slurp(dir / (tag + ".svg"));
  };
  EXPECT_EQ(go("h1"), go("h2"));
}

TEST_F(Cli, ExperimentRejectsBadMode) {
  const auto r = run("experiment --src " + quote(es_vec) + " --tgt " + quote(en_vec) + " --lexicon " + lexicon() +
                     " --mode sideways --epochs 2 --csv " + quote(dir / "m.csv") + " --svg " + quote(dir / "m.svg"));
  EXPECT_EQ(r.status, 1);
}

TEST_F(Cli, PlotRerendersFromCsv) {
  const auto csv = dir / "p.csv";
  ASSERT_EQ(run("experiment --src " + quote(es_vec) + " --tgt " + quote(en_vec) + " --lexicon " + lexicon() +
                " --hidden 0 --epochs 3 --log-every 0 --csv " + quote(csv) + " --svg " + quote(dir / "p.svg"))
                .status,
            0);
  const auto out = dir / "replot.svg";
  const auto r = run("plot --csv " + quote(csv) + " --svg " + quote(out) + " --title Replot");
  ASSERT_EQ(r.status, 0) << r.output;
  const std::string svg = slurp(out);
  EXPECT_NE(svg.find("Replot"), std::string::npos);
  EXPECT_EQ(run("plot --csv /no/such.csv --svg " + quote(out)).status, 2);
}

}  // namespace
