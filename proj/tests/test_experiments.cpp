#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <sstream>

#include "lmd/error.hpp"
#include "lmd/experiments.hpp"
#include "support/oracles.hpp"

namespace {

using lmd::EmbeddingSpace;
using lmd::ExperimentConfig;
using lmd::Matrix;

std::vector<std::string> names(const std::string& prefix, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

struct World {
  EmbeddingSpace src;
  EmbeddingSpace tgt;
  lmd::BilingualLexicon lex;
};

// Target = source rotated by a random orthogonal map, plus optional noise.
World rotated_world(std::size_t n, std::size_t d, double noise, std::uint64_t seed) {
  lmd::Rng rng(seed);
  const Matrix x = oracle::random_gaussian(n, d, rng);
  Matrix y = oracle::naive_matmul(x, oracle::random_orthogonal(d, rng));
  for (double& v : y.data()) v += noise * rng.normal();
  std::vector<lmd::LexiconPair> pairs;
  for (std::size_t i = 0; i < n; ++i) pairs.push_back({"s" + std::to_string(i), "t" + std::to_string(i)});
  return {EmbeddingSpace(lmd::Vocabulary(names("s", n)), x), EmbeddingSpace(lmd::Vocabulary(names("t", n)), y),
          lmd::BilingualLexicon(pairs)};
}

ExperimentConfig small_config(std::size_t d, std::size_t epochs) {
  ExperimentConfig c;
  c.mapper.d_in = d;
  c.mapper.d_out = d;
  c.mapper.hidden = 0;
  c.mapper.lr = 0.5;
  c.mapper.batch_size = 8;
  c.mapper.epochs = epochs;
  c.ks = {1, 3, 5};
  return c;
}

std::string csv_of(const lmd::ExperimentResult& r) {
  std::ostringstream out;
  lmd::write_csv(r, out);
  return out.str();
}

std::string svg_of(const lmd::ExperimentResult& r) {
  std::ostringstream out;
  lmd::write_plot(r, out);
  return out.str();
}

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (std::size_t pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

TEST(EvalMode, ParsesBothSpellings) {
  EXPECT_EQ(lmd::parse_eval_mode("in-sample"), lmd::EvalMode::in_sample);
  EXPECT_EQ(lmd::parse_eval_mode("held-out"), lmd::EvalMode::held_out);
  EXPECT_EQ(lmd::to_string(lmd::EvalMode::held_out), "held-out");
  EXPECT_THROW(lmd::parse_eval_mode("sideways"), lmd::ConfigError);
}

TEST(RunExperiment, IdentitySetupScoresPerfectly) {
  const auto w = rotated_world(40, 6, 0.0, 1);
  std::vector<lmd::LexiconPair> self;
  for (const auto& t : w.src.vocab().tokens()) self.push_back({t, t});
  auto c = small_config(6, 3);
  c.mapper.lr = 0.0;
  const auto r = lmd::run_experiment(w.src, w.src, lmd::BilingualLexicon(self), c,
                                     lmd::Mapper(std::vector<Matrix>{Matrix::identity(6)}));
  ASSERT_EQ(r.records.size(), 3u);
  for (const auto& rec : r.records) {
    EXPECT_EQ(rec.lmd_acc.at(1), 1.0);
    EXPECT_EQ(rec.mean_cosine, 1.0);
    EXPECT_NEAR(rec.train_loss, 0.0, 1e-15);
  }
  EXPECT_EQ(r.baseline.lmd_acc.at(1), 1.0);
  EXPECT_LT(r.baseline.residual, 1e-10);
}

TEST(RunExperiment, InSampleEvaluatesTrainingPairs) {
  const auto w = rotated_world(60, 5, 0.05, 2);
  const auto r = lmd::run_experiment(w.src, w.tgt, w.lex, small_config(5, 4));
  EXPECT_EQ(r.train_pairs, 60u);
  EXPECT_EQ(r.eval_pairs, 60u);
  EXPECT_EQ(r.records.size(), 4u);
  for (std::size_t i = 0; i < r.records.size(); ++i) EXPECT_EQ(r.records[i].epoch, i + 1);
  EXPECT_GT(r.baseline.lmd_acc.at(1), 0.9);
}

TEST(RunExperiment, HeldOutUsesDisjointSplit) {
  const auto w = rotated_world(50, 5, 0.05, 3);
  auto c = small_config(5, 2);
  c.mode = lmd::EvalMode::held_out;
  c.train_fraction = 0.8;
  c.split_seed = 9;
  const auto r = lmd::run_experiment(w.src, w.tgt, w.lex, c);
  EXPECT_EQ(r.train_pairs, 40u);
  EXPECT_EQ(r.eval_pairs, 10u);
  const auto s = lmd::split(w.lex, 0.8, 9);
  for (const auto& p : s.test) EXPECT_EQ(std::count(s.train.begin(), s.train.end(), p), 0);
}

TEST(RunExperiment, MapperLearnsRotation) {
  const auto w = rotated_world(80, 6, 0.0, 4);
  auto c = small_config(6, 150);
  c.normalize = false;
  const auto r = lmd::run_experiment(w.src, w.tgt, w.lex, c);
  EXPECT_GT(r.records.back().mean_cosine, 0.99);
  EXPECT_LT(r.records.back().train_loss, r.records.front().train_loss);
}

TEST(RunExperiment, DeterministicAndCallbackSeesEveryEpoch) {
  const auto w = rotated_world(40, 4, 0.1, 5);
  auto c = small_config(4, 5);
  c.mapper.hidden = 6;
  std::vector<std::size_t> seen;
  const auto a = lmd::run_experiment(w.src, w.tgt, w.lex, c, std::nullopt,
                                     [&](const lmd::MetricRecord& rec) { seen.push_back(rec.epoch); });
  c.workers = 3;
  const auto b = lmd::run_experiment(w.src, w.tgt, w.lex, c);
  EXPECT_EQ(seen, (std::vector<std::size_t>{1, 2, 3, 4, 5}));
  EXPECT_EQ(csv_of(a), csv_of(b));
  EXPECT_EQ(svg_of(a), svg_of(b));
}

TEST(RunExperiment, Errors) {
  const auto w = rotated_world(30, 4, 0.0, 6);
  EXPECT_THROW(lmd::run_experiment(w.src, w.tgt, w.lex, small_config(5, 1)), lmd::DimensionError);
  const auto narrow = rotated_world(30, 3, 0.0, 6);
  EXPECT_THROW(lmd::run_experiment(w.src, narrow.tgt, w.lex, small_config(4, 1)), lmd::DimensionError);
  std::vector<lmd::LexiconPair> few(w.lex.begin(), w.lex.begin() + 9);
  EXPECT_THROW(lmd::run_experiment(w.src, w.tgt, lmd::BilingualLexicon(few), small_config(4, 1)),
               lmd::InsufficientDataError);
  auto bad_k = small_config(4, 1);
  bad_k.ks = {0};
  EXPECT_THROW(lmd::run_experiment(w.src, w.tgt, w.lex, bad_k), lmd::ConfigError);
}

TEST(RunExperiment, ReportsDroppedPairs) {
  auto w = rotated_world(30, 4, 0.0, 7);
  std::vector<lmd::LexiconPair> pairs(w.lex.begin(), w.lex.end());
  pairs.push_back({"zz", "t0"});
  const auto r = lmd::run_experiment(w.src, w.tgt, lmd::BilingualLexicon(pairs), small_config(4, 1));
  ASSERT_EQ(r.dropped.size(), 1u);
  EXPECT_TRUE(r.dropped[0].source_oov);
}

TEST(Csv, RowsColumnsAndBaseline) {
  const auto w = rotated_world(30, 4, 0.1, 8);
  const auto r = lmd::run_experiment(w.src, w.tgt, w.lex, small_config(4, 3));
  const std::string csv = csv_of(r);
  std::istringstream in(csv);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_EQ(lines[0], "epoch,train_loss,mean_cosine,lmd_acc@1,lmd_acc@3,lmd_acc@5");
  for (const auto& l : lines) EXPECT_EQ(std::count(l.begin(), l.end(), ','), 5);
  EXPECT_EQ(lines[4].rfind("baseline,", 0), 0u);
}

TEST(Csv, ReloadReproducesPrintedValues) {
  const auto w = rotated_world(30, 4, 0.1, 9);
  const auto r = lmd::run_experiment(w.src, w.tgt, w.lex, small_config(4, 3));
  const auto path = std::filesystem::temp_directory_path() / "lmd_test_experiment.csv";
  lmd::emit_csv(r, path);
  const auto back = lmd::load_csv(path);
  std::filesystem::remove(path);
  ASSERT_EQ(back.records.size(), 3u);
  EXPECT_EQ(back.config.ks, r.config.ks);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(back.records[i].mean_cosine, r.records[i].mean_cosine, 1e-8 * std::abs(r.records[i].mean_cosine));
    EXPECT_NEAR(back.records[i].train_loss, r.records[i].train_loss, 1e-8 * std::abs(r.records[i].train_loss));
    EXPECT_EQ(back.records[i].lmd_acc.size(), 3u);
  }
  EXPECT_EQ(csv_of(back), csv_of(r));
}

TEST(Csv, RejectsMalformed) {
  std::istringstream no_header("");
  EXPECT_THROW(lmd::read_csv(no_header), lmd::FormatError);
  std::istringstream no_baseline("epoch,train_loss,mean_cosine,lmd_acc@1\n1,0.5,0.5,0.5\n");
  EXPECT_THROW(lmd::read_csv(no_baseline), lmd::FormatError);
  std::istringstream gap("epoch,train_loss,mean_cosine,lmd_acc@1\n2,0.5,0.5,0.5\nbaseline,0,1,1\n");
  EXPECT_THROW(lmd::read_csv(gap), lmd::FormatError);
}

TEST(Plot, PolylinePointsPerMetric) {
  const auto w = rotated_world(30, 4, 0.1, 10);
  for (std::size_t epochs : {2u, 7u}) {
    const auto r = lmd::run_experiment(w.src, w.tgt, w.lex, small_config(4, epochs));
    const std::string svg = svg_of(r);
    EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
    EXPECT_NE(svg.find("<svg"), std::string::npos);
    EXPECT_EQ(count(svg, "<polyline"), 4u);  // mean_cosine + 3 k values
    std::size_t pos = 0;
    while ((pos = svg.find("points=\"", pos)) != std::string::npos) {
      pos += 8;
      const std::string pts = svg.substr(pos, svg.find('"', pos) - pos);
      EXPECT_EQ(static_cast<std::size_t>(std::count(pts.begin(), pts.end(), ',')), epochs);
    }
  }
}

TEST(Plot, ByteIdenticalAndNeedsTwoRecords) {
  const auto w = rotated_world(30, 4, 0.1, 11);
  const auto r = lmd::run_experiment(w.src, w.tgt, w.lex, small_config(4, 3));
  EXPECT_EQ(svg_of(r), svg_of(r));
  const auto one = lmd::run_experiment(w.src, w.tgt, w.lex, small_config(4, 1));
  std::ostringstream out;
  EXPECT_THROW(lmd::write_plot(one, out), lmd::InsufficientDataError);
}

TEST(Plot, TitleIsEscaped) {
  const auto w = rotated_world(30, 4, 0.1, 12);
  const auto r = lmd::run_experiment(w.src, w.tgt, w.lex, small_config(4, 2));
  std::ostringstream out;
  lmd::write_plot(r, out, "a<b & c");
  EXPECT_NE(out.str().find("a&lt;b &amp; c"), std::string::npos);
}

}  // namespace
