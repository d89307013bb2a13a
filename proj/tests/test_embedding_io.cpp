#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lmd/embedding_io.hpp"
#include "lmd/error.hpp"
#include "support/oracles.hpp"

namespace {

using lmd::EmbeddingSpace;
using lmd::Matrix;
using lmd::Vocabulary;

EmbeddingSpace parse(const std::string& text) {
  std::istringstream in(text);
  return lmd::read_word2vec_text(in);
}

std::string render(const EmbeddingSpace& s) {
  std::ostringstream out;
  lmd::write_word2vec_text(s, out);
  return out.str();
}

EmbeddingSpace random_space(std::size_t n, std::size_t d, std::uint64_t seed) {
  lmd::Rng rng(seed);
  std::vector<std::string> tokens;
  for (std::size_t i = 0; i < n; ++i) tokens.push_back("w" + std::to_string(i));
  return EmbeddingSpace(Vocabulary(tokens), oracle::random_gaussian(n, d, rng));
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("lmd_test_" + name);
}

TEST(Vocabulary, FindsTokensByPosition) {
  Vocabulary v({"aa", "bb", "cc"});
  EXPECT_EQ(v.size(), 3u);
  EXPECT_EQ(v.find("bb"), 1u);
  EXPECT_FALSE(v.find("dd").has_value());
  EXPECT_TRUE(v.contains("cc"));
}

TEST(Vocabulary, RejectsDuplicatesAndInvalidTokens) {
  EXPECT_THROW(Vocabulary({"aa", "aa"}), lmd::FormatError);
  EXPECT_THROW(Vocabulary({"a a"}), lmd::FormatError);
  EXPECT_THROW(Vocabulary({""}), lmd::FormatError);
}

TEST(Vocabulary, IsCaseSensitive) {
  Vocabulary v({"Casa", "casa"});
  EXPECT_EQ(v.find("Casa"), 0u);
  EXPECT_EQ(v.find("casa"), 1u);
}

TEST(EmbeddingSpace, RejectsShapeMismatchAndNonFinite) {
  EXPECT_THROW(EmbeddingSpace(Vocabulary({"aa"}), Matrix(2, 3)), lmd::DimensionError);
  EXPECT_THROW(EmbeddingSpace(Vocabulary({"aa"}), Matrix(1, 0)), lmd::DimensionError);
  EXPECT_THROW(EmbeddingSpace(Vocabulary({"aa"}), Matrix{{NAN}}), lmd::FormatError);
}

TEST(ReadWord2vec, ParsesTwoWordSpace) {
  const auto s = parse("2 3\naa 1 0 0\nbb 0 1 0");
  EXPECT_EQ(s.vocab().tokens(), (std::vector<std::string>{"aa", "bb"}));
  EXPECT_EQ(s.dim(), 3u);
  EXPECT_EQ(s.matrix(), (Matrix{{1, 0, 0}, {0, 1, 0}}));
}

TEST(ReadWord2vec, ReportsRowWidthWithLineNumber) {
  try {
    parse("2 3\naa 1 0\nbb 0 1 0\n");
    FAIL() << "expected FormatError";
  } catch (const lmd::FormatError& e) {
    EXPECT_STREQ(e.what(), "row width 2 ≠ 3 at line 2");
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(ReadWord2vec, RejectsMalformedInputs) {
  EXPECT_THROW(parse(""), lmd::FormatError);
  EXPECT_THROW(parse("two 3\n"), lmd::FormatError);
  EXPECT_THROW(parse("2 3\naa 1 0 0\n"), lmd::FormatError);
  EXPECT_THROW(parse("1 1\naa x\n"), lmd::FormatError);
  EXPECT_THROW(parse("1 1\naa nan\n"), lmd::FormatError);
  EXPECT_THROW(parse("2 1\naa 1\naa 2\n"), lmd::FormatError);
  EXPECT_THROW(parse("1 1\naa 1\nbb 2\n"), lmd::FormatError);
}

TEST(ReadWord2vec, ToleratesCarriageReturns) {
  const auto s = parse("1 2\r\naa 0.25 -1\r\n");
  EXPECT_EQ(s.matrix(), (Matrix{{0.25, -1}}));
}

TEST(WriteWord2vec, SingleValueFormat) {
  const EmbeddingSpace s(Vocabulary({"aa"}), Matrix{{0.5}});
  EXPECT_EQ(render(s), "1 1\naa 0.5\n");
}

TEST(WriteWord2vec, EmptyVocabularyWritesHeaderOnly) {
  const EmbeddingSpace s(4);
  EXPECT_EQ(render(s), "0 4\n");
  const auto back = parse(render(s));
  EXPECT_EQ(back.size(), 0u);
  EXPECT_EQ(back.dim(), 4u);
}

TEST(WriteWord2vec, RoundTripIsExact) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto s = random_space(20 + seed, 7, seed);
    EXPECT_EQ(parse(render(s)), s);
  }
}

TEST(WriteWord2vec, FileRoundTripIsExact) {
  const auto path = temp_path("roundtrip.txt");
  const auto s = random_space(30, 5, 99);
  lmd::save_word2vec_text(s, path);
  EXPECT_EQ(lmd::load_word2vec_text(path), s);
  std::filesystem::remove(path);
}

TEST(LoadWord2vec, MissingFileNamesPath) {
  try {
    lmd::load_word2vec_text("/nonexistent/vectors.txt");
    FAIL() << "expected IoError";
  } catch (const lmd::IoError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/vectors.txt"), std::string::npos);
  }
}

TEST(LoadWord2vec, FileErrorsKeepLineNumber) {
  const auto path = temp_path("bad.txt");
  std::ofstream(path) << "2 3\naa 1 0\n";
  try {
    lmd::load_word2vec_text(path);
    FAIL() << "expected FormatError";
  } catch (const lmd::FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("row width 2 ≠ 3 at line 2"), std::string::npos);
  }
  std::filesystem::remove(path);
}

TEST(Lookup, ReturnsRowAndThrowsOnOov) {
  const auto s = parse("2 3\naa 1 0 0\nbb 0 1 0");
  const auto v = s.lookup("aa");
  EXPECT_EQ(std::vector<double>(v.begin(), v.end()), (std::vector<double>{1, 0, 0}));
  EXPECT_THROW(s.lookup("missing"), lmd::OovError);
}

TEST(NormalizeRows, ThreeFourFive) {
  const EmbeddingSpace s(Vocabulary({"aa"}), Matrix{{3, 4}});
  const auto n = lmd::normalize_rows(s);
  EXPECT_NEAR(n.space.matrix()(0, 0), 0.6, 1e-15);
  EXPECT_NEAR(n.space.matrix()(0, 1), 0.8, 1e-15);
  EXPECT_TRUE(n.zero_rows.empty());
}

TEST(NormalizeRows, ZeroRowIsKeptAndReported) {
  const EmbeddingSpace s(Vocabulary({"aa", "zz"}), Matrix{{1, 1}, {0, 0}});
  const auto n = lmd::normalize_rows(s);
  EXPECT_EQ(n.zero_rows, std::vector<std::size_t>{1});
  EXPECT_EQ(n.space.matrix()(1, 0), 0.0);
  EXPECT_EQ(n.space.matrix()(1, 1), 0.0);
}

TEST(NormalizeRows, UnitNormsAndIdempotence) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto s = random_space(40, 9, seed);
    const auto once = lmd::normalize_rows(s).space;
    for (std::size_t i = 0; i < once.size(); ++i) {
      double sq = 0.0;
      for (double v : once.row(i)) sq += v * v;
      EXPECT_LT(std::abs(std::sqrt(sq) - 1.0), 1e-12);
    }
    EXPECT_EQ(lmd::normalize_rows(once).space, once);
  }
}

TEST(NormalizeRows, LookupAfterNormalizeIsUnit) {
  const auto s = lmd::normalize_rows(parse("2 2\naa 2 0\nbb 1 1\n")).space;
  const auto v = s.lookup("bb");
  EXPECT_NEAR(std::hypot(v[0], v[1]), 1.0, 1e-12);
}

}  // namespace
