#include "lmd/cbow.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>

#include "lmd/error.hpp"

namespace lmd {

namespace {

// --- UTF-8 helpers -----------------------------------------------------------

constexpr char32_t kReplacement = 0xFFFD;

// Decodes one code point starting at s[i], advancing i. Malformed sequences
// yield U+FFFD and consume a single byte.
char32_t decode_utf8(std::string_view s, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  std::size_t len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++i;
    return kReplacement;
  }
  if (i + len > s.size()) {
    ++i;
    return kReplacement;
  }
  for (std::size_t k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) {
      ++i;
      return kReplacement;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  i += len;
  return cp;
}

void encode_utf8(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_unicode_space(char32_t c) {
  return (c >= 0x09 && c <= 0x0D) || c == 0x20 || c == 0x85 || c == 0xA0 || c == 0x1680 ||
         (c >= 0x2000 && c <= 0x200A) || c == 0x2028 || c == 0x2029 || c == 0x202F || c == 0x205F ||
         c == 0x3000;
}

bool is_strip_punct(char32_t c) {
  switch (c) {
    case '.': case ',': case ';': case ':': case '!': case '?':
    case '"': case '\'': case '(': case ')': case '[': case ']':
    case 0x00BF:  // ¿
    case 0x00A1:  // ¡
      return true;
    default:
      return false;
  }
}

// Lowercase for ASCII, Latin-1, Latin Extended-A, Greek and Cyrillic.
char32_t to_lower(char32_t c) {
  if (c >= 'A' && c <= 'Z') return c + 32;
  if (c < 0x80) return c;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 32;
  if (c == 0x130) return 'i';
  if (c == 0x178) return 0xFF;
  if ((c >= 0x100 && c <= 0x12F) || (c >= 0x132 && c <= 0x137) || (c >= 0x14A && c <= 0x177))
    return (c % 2 == 0) ? c + 1 : c;
  if ((c >= 0x139 && c <= 0x148) || (c >= 0x179 && c <= 0x17E)) return (c % 2 == 1) ? c + 1 : c;
  if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) return c + 32;
  if (c == 0x386) return 0x3AC;
  if (c >= 0x388 && c <= 0x38A) return c + 37;
  if (c == 0x38C) return 0x3CC;
  if (c == 0x38E || c == 0x38F) return c + 63;
  if (c >= 0x410 && c <= 0x42F) return c + 32;
  if (c >= 0x400 && c <= 0x40F) return c + 80;
  return c;
}

void flush_token(std::vector<char32_t>& cps, std::vector<std::string>& out) {
  std::size_t b = 0;
  std::size_t e = cps.size();
  while (b < e && is_strip_punct(cps[b])) ++b;
  while (e > b && is_strip_punct(cps[e - 1])) --e;
  if (b < e) {
    std::string tok;
    for (std::size_t k = b; k < e; ++k) encode_utf8(to_lower(cps[k]), tok);
    out.push_back(std::move(tok));
  }
  cps.clear();
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// -log(sigmoid(x)), stable for large |x|.
double neg_log_sigmoid(double x) {
  if (x >= 0) return std::log1p(std::exp(-x));
  return -x + std::log1p(std::exp(x));
}

}  // namespace

void CbowConfig::validate() const {
  if (dim < 1) throw ConfigError("cbow: dim must be >= 1");
  if (window < 1) throw ConfigError("cbow: window must be >= 1");
  if (negatives < 1) throw ConfigError("cbow: negatives must be >= 1");
  if (epochs < 1) throw ConfigError("cbow: epochs must be >= 1");
  if (!(initial_lr > 0.0) || !std::isfinite(initial_lr)) throw ConfigError("cbow: initial learning rate must be > 0");
  if (min_count < 1) throw ConfigError("cbow: min_count must be >= 1");
  if (!(sampling_exponent >= 0.0)) throw ConfigError("cbow: sampling exponent must be >= 0");
}

std::vector<std::string> tokenize(std::string_view line) {
  std::vector<std::string> out;
  std::vector<char32_t> current;
  std::size_t i = 0;
  while (i < line.size()) {
    const char32_t cp = decode_utf8(line, i);
    if (is_unicode_space(cp)) {
      flush_token(current, out);
    } else {
      current.push_back(cp);
    }
  }
  flush_token(current, out);
  return out;
}

std::vector<std::string> read_lines(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(std::move(line));
  return lines;
}

VocabCounts build_vocab(std::span<const std::string> lines, std::size_t min_count) {
  std::map<std::string, std::uint64_t, std::less<>> freq;
  for (const auto& line : lines)
    for (auto& tok : tokenize(line)) ++freq[std::move(tok)];

  std::vector<std::pair<std::string, std::uint64_t>> kept;
  for (auto& [tok, n] : freq)
    if (n >= min_count) kept.emplace_back(tok, n);
  if (kept.empty())
    throw InsufficientDataError("empty vocabulary after min_count=" + std::to_string(min_count) + " filtering");

  // std::map iteration is already in ascending byte order, so a stable sort on
  // frequency yields the (freq desc, token asc) ordering.
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.second > b.second; });

  std::vector<std::string> tokens;
  std::vector<std::uint64_t> counts;
  tokens.reserve(kept.size());
  counts.reserve(kept.size());
  for (auto& [tok, n] : kept) {
    tokens.push_back(std::move(tok));
    counts.push_back(n);
  }
  return {Vocabulary(std::move(tokens)), std::move(counts)};
}

UnigramTable::UnigramTable(std::span<const std::uint64_t> counts, double alpha) {
  if (counts.empty()) throw InsufficientDataError("unigram table needs at least one token");
  cumulative_.reserve(counts.size());
  double total = 0.0;
  for (auto c : counts) {
    total += c == 0 ? 0.0 : std::pow(static_cast<double>(c), alpha);
    cumulative_.push_back(total);
  }
  if (!(total > 0.0)) throw InsufficientDataError("unigram table has no positive weight");
}

std::size_t UnigramTable::sample(Rng& rng) const {
  const double u = rng.uniform01() * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) --it;
  return static_cast<std::size_t>(it - cumulative_.begin());
}

CbowResult train_cbow(std::span<const std::string> lines, const CbowConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  VocabCounts vc = build_vocab(lines, config.min_count);
  const std::size_t n = vc.vocab.size();
  const std::size_t d = config.dim;

  std::vector<std::vector<std::size_t>> sentences;
  sentences.reserve(lines.size());
  std::size_t total_words = 0;
  for (const auto& line : lines) {
    std::vector<std::size_t> ids;
    for (const auto& tok : tokenize(line))
      if (auto idx = vc.vocab.find(tok)) ids.push_back(*idx);
    total_words += ids.size();
    if (!ids.empty()) sentences.push_back(std::move(ids));
  }

  Rng rng(config.seed);
  Matrix input(n, d);
  Matrix output(n, d, 0.0);
  const double bound = 0.5 / static_cast<double>(d);
  for (double& v : input.data()) v = rng.uniform(-bound, bound);

  const UnigramTable table(vc.counts, config.sampling_exponent);
  const double total_steps = static_cast<double>(total_words) * static_cast<double>(config.epochs);
  double steps_done = 0.0;

  std::vector<double> hidden(d);
  std::vector<double> grad_hidden(d);
  std::vector<double> epoch_loss;
  epoch_loss.reserve(config.epochs);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    double loss_sum = 0.0;
    std::size_t examples = 0;
    for (const auto& sent : sentences) {
      for (std::size_t pos = 0; pos < sent.size(); ++pos, steps_done += 1.0) {
        const double progress = total_steps > 0 ? steps_done / total_steps : 0.0;
        const double lr = config.initial_lr * (1.0 - 0.9 * progress);

        const std::size_t lo = pos >= config.window ? pos - config.window : 0;
        const std::size_t hi = std::min(sent.size() - 1, pos + config.window);
        std::size_t context = 0;
        std::fill(hidden.begin(), hidden.end(), 0.0);
        for (std::size_t c = lo; c <= hi; ++c) {
          if (c == pos) continue;
          auto in_row = input.row(sent[c]);
          for (std::size_t j = 0; j < d; ++j) hidden[j] += in_row[j];
          ++context;
        }
        if (context == 0) continue;
        const double inv = 1.0 / static_cast<double>(context);
        for (double& h : hidden) h *= inv;
        std::fill(grad_hidden.begin(), grad_hidden.end(), 0.0);

        const std::size_t center = sent[pos];
        double example_loss = 0.0;
        for (std::size_t s = 0; s <= config.negatives; ++s) {
          std::size_t target = center;
          double label = 1.0;
          if (s > 0) {
            target = table.sample(rng);
            if (target == center) continue;
            label = 0.0;
          }
          auto out_row = output.row(target);
          const double score = dot(hidden, out_row);
          example_loss += label > 0.0 ? neg_log_sigmoid(score) : neg_log_sigmoid(-score);
          const double g = (label - sigmoid(score)) * lr;
          for (std::size_t j = 0; j < d; ++j) grad_hidden[j] += g * out_row[j];
          for (std::size_t j = 0; j < d; ++j) out_row[j] += g * hidden[j];
        }
        for (std::size_t c = lo; c <= hi; ++c) {
          if (c == pos) continue;
          auto in_row = input.row(sent[c]);
          for (std::size_t j = 0; j < d; ++j) in_row[j] += grad_hidden[j];
        }
        loss_sum += example_loss;
        ++examples;
      }
    }
    const double mean = examples > 0 ? loss_sum / static_cast<double>(examples) : 0.0;
    epoch_loss.push_back(mean);
    if (on_epoch) on_epoch(epoch + 1, mean);
  }

  return {EmbeddingSpace(std::move(vc.vocab), std::move(input)), std::move(vc.counts), std::move(epoch_loss)};
}

}  // namespace lmd
