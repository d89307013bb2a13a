#include "lmd/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>

#include "lmd/error.hpp"
#include "lmd/procrustes.hpp"

namespace lmd {

namespace {

constexpr std::size_t kMinPairs = 10;

std::string fmt(const char* pattern, double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::string fmt9(double v) { return fmt("%.9g", v); }

std::vector<std::size_t> normalized_ks(std::vector<std::size_t> ks) {
  if (ks.empty()) throw ConfigError("experiment: empty k list");
  for (std::size_t k : ks)
    if (k < 1) throw ConfigError("experiment: k must be >= 1");
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  return ks;
}

std::vector<std::string> targets_of(const BilingualLexicon& lex) {
  std::vector<std::string> out;
  out.reserve(lex.size());
  for (const auto& p : lex) out.push_back(p.target);
  return out;
}

double mean_loss(const Matrix& pred, const Matrix& truth) { return 1.0 - mean_cosine(pred, truth).mean; }

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw FormatError("bad number '" + s + "'", line_no);
  return v;
}

}  // namespace

std::string to_string(EvalMode mode) { return mode == EvalMode::in_sample ? "in-sample" : "held-out"; }

EvalMode parse_eval_mode(const std::string& text) {
  if (text == "in-sample" || text == "in_sample") return EvalMode::in_sample;
  if (text == "held-out" || text == "held_out") return EvalMode::held_out;
  throw ConfigError("unknown mode '" + text + "' (expected in-sample or held-out)");
}

ExperimentResult run_experiment(const EmbeddingSpace& src, const EmbeddingSpace& tgt, const BilingualLexicon& lex,
                                const ExperimentConfig& config, std::optional<Mapper> initial,
                                const RecordCallback& on_epoch) {
  ExperimentResult result;
  result.config = config;
  result.config.ks = normalized_ks(config.ks);
  const auto& ks = result.config.ks;
  config.mapper.validate();

  if (src.dim() != tgt.dim())
    throw DimensionError("experiment: source dim " + std::to_string(src.dim()) + " ≠ target dim " +
                         std::to_string(tgt.dim()) + " (the Procrustes baseline needs equal widths)");
  if (config.mapper.d_in != src.dim() || config.mapper.d_out != tgt.dim())
    throw DimensionError("experiment: mapper is " + std::to_string(config.mapper.d_in) + "->" +
                         std::to_string(config.mapper.d_out) + " but spaces are " + std::to_string(src.dim()) +
                         "->" + std::to_string(tgt.dim()));

  auto tgt_normalized = std::make_shared<const EmbeddingSpace>(normalize_rows(tgt).space);
  const NeighborIndex index(tgt_normalized);
  const EmbeddingSpace src_used = config.normalize ? normalize_rows(src).space : src;
  const EmbeddingSpace& tgt_used = config.normalize ? *tgt_normalized : tgt;

  FilterResult filtered = filter_by_vocab(lex, src_used, tgt_used);
  result.dropped = std::move(filtered.dropped);
  if (filtered.kept.size() < kMinPairs)
    throw InsufficientDataError("experiment: only " + std::to_string(filtered.kept.size()) +
                                " lexicon pairs are in vocabulary, need at least " + std::to_string(kMinPairs));

  BilingualLexicon train_lex;
  BilingualLexicon eval_lex;
  if (config.mode == EvalMode::in_sample) {
    train_lex = filtered.kept;
    eval_lex = filtered.kept;
  } else {
    LexiconSplit s = split(filtered.kept, config.train_fraction, config.split_seed);
    train_lex = std::move(s.train);
    eval_lex = std::move(s.test);
  }
  const PairedMatrices train = to_matrices(train_lex, src_used, tgt_used);
  const PairedMatrices eval = to_matrices(eval_lex, src_used, tgt_used);
  const std::vector<std::string> eval_truths = targets_of(eval_lex);
  result.train_pairs = train.size();
  result.eval_pairs = eval.size();

  const ProcrustesResult fit = orthogonal_procrustes(train.x, train.y);
  {
    const Matrix eval_pred = apply_map(eval.x, fit.r);
    result.baseline.residual = fit.residual;
    result.baseline.train_loss = mean_loss(apply_map(train.x, fit.r), train.y);
    result.baseline.mean_cosine = mean_cosine(eval_pred, eval.y).mean;
    result.baseline.lmd_acc = lmd_accuracy(index, eval_pred, eval_truths, ks, config.workers).accuracy;
  }

  Mapper mapper = initial ? std::move(*initial) : Mapper(config.mapper);
  if (mapper.d_in() != src.dim() || mapper.d_out() != tgt.dim())
    throw DimensionError("experiment: initial mapper shape does not match the spaces");

  result.records.reserve(config.mapper.epochs);
  for (std::size_t epoch = 1; epoch <= config.mapper.epochs; ++epoch) {
    const EpochReport rep = train_epoch(mapper, train.x, train.y, config.mapper, epoch);
    const Matrix pred = mapper.forward(eval.x);
    MetricRecord rec;
    rec.epoch = epoch;
    rec.train_loss = rep.mean_loss;
    rec.lmd_acc = lmd_accuracy(index, pred, eval_truths, ks, config.workers).accuracy;
    // A collapsed mapper can emit only zero rows; score that as cosine 0.
    try {
      rec.mean_cosine = mean_cosine(pred, eval.y).mean;
    } catch (const InsufficientDataError&) {
      rec.mean_cosine = 0.0;
    }
    if (on_epoch) on_epoch(rec);
    result.records.push_back(std::move(rec));
  }
  return result;
}

void write_csv(const ExperimentResult& result, std::ostream& out) {
  const auto& ks = result.config.ks;
  out << "epoch,train_loss,mean_cosine";
  for (std::size_t k : ks) out << ",lmd_acc@" << k;
  out << '\n';
  auto acc_cells = [&](const std::map<std::size_t, double>& acc) {
    for (std::size_t k : ks) {
      auto it = acc.find(k);
      if (it == acc.end()) throw DimensionError("csv: record lacks lmd_acc@" + std::to_string(k));
      out << ',' << fmt9(it->second);
    }
  };
  for (const auto& r : result.records) {
    out << r.epoch << ',' << fmt9(r.train_loss) << ',' << fmt9(r.mean_cosine);
    acc_cells(r.lmd_acc);
    out << '\n';
  }
  out << "baseline," << fmt9(result.baseline.train_loss) << ',' << fmt9(result.baseline.mean_cosine);
  acc_cells(result.baseline.lmd_acc);
  out << '\n';
}

void emit_csv(const ExperimentResult& result, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_csv(result, out);
  out.flush();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

ExperimentResult read_csv(std::istream& in) {
  ExperimentResult result;
  std::string line;
  if (!std::getline(in, line)) throw FormatError("missing CSV header", 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv(line);
  if (header.size() < 4 || header[0] != "epoch" || header[1] != "train_loss" || header[2] != "mean_cosine")
    throw FormatError("CSV header must start with 'epoch,train_loss,mean_cosine' and list lmd_acc@k columns", 1);
  std::vector<std::size_t> ks;
  for (std::size_t c = 3; c < header.size(); ++c) {
    const std::string prefix = "lmd_acc@";
    std::size_t k = 0;
    const auto& h = header[c];
    if (h.rfind(prefix, 0) != 0 ||
        std::from_chars(h.data() + prefix.size(), h.data() + h.size(), k).ptr != h.data() + h.size() || k == 0)
      throw FormatError("bad column '" + h + "'", 1);
    ks.push_back(k);
  }
  result.config.ks = ks;

  bool have_baseline = false;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size())
      throw FormatError("expected " + std::to_string(header.size()) + " columns, found " +
                        std::to_string(cells.size()), line_no);
    std::map<std::size_t, double> acc;
    for (std::size_t i = 0; i < ks.size(); ++i) acc[ks[i]] = parse_double(cells[3 + i], line_no);
    if (cells[0] == "baseline") {
      result.baseline.train_loss = parse_double(cells[1], line_no);
      result.baseline.mean_cosine = parse_double(cells[2], line_no);
      result.baseline.lmd_acc = std::move(acc);
      have_baseline = true;
      continue;
    }
    MetricRecord rec;
    auto [ptr, ec] = std::from_chars(cells[0].data(), cells[0].data() + cells[0].size(), rec.epoch);
    if (ec != std::errc() || ptr != cells[0].data() + cells[0].size())
      throw FormatError("bad epoch '" + cells[0] + "'", line_no);
    if (rec.epoch != result.records.size() + 1) throw FormatError("epochs must be contiguous from 1", line_no);
    rec.train_loss = parse_double(cells[1], line_no);
    rec.mean_cosine = parse_double(cells[2], line_no);
    rec.lmd_acc = std::move(acc);
    result.records.push_back(std::move(rec));
  }
  if (!have_baseline) throw FormatError("CSV has no baseline row");
  return result;
}

ExperimentResult load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open CSV '" + path.string() + "'");
  try {
    return read_csv(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

// --- SVG -------------------------------------------------------------------

namespace {

constexpr double kWidth = 760;
constexpr double kHeight = 460;
constexpr double kLeft = 64;
constexpr double kRight = 200;
constexpr double kTop = 44;
constexpr double kBottom = 56;
constexpr double kYMax = 1.05;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string esc(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::size_t tick_step(std::size_t span) {
  std::size_t step = 1;
  for (std::size_t mag = 1;; mag *= 10) {
    for (std::size_t m : {1, 2, 5}) {
      step = m * mag;
      if (span / step <= 8) return step;
    }
  }
}

}  // namespace

void write_plot(const ExperimentResult& result, std::ostream& out, const std::string& title) {
  const auto& recs = result.records;
  if (recs.size() < 2) throw InsufficientDataError("plot needs at least 2 epochs, got " + std::to_string(recs.size()));
  const auto& ks = result.config.ks;
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  const double first = static_cast<double>(recs.front().epoch);
  const double last = static_cast<double>(recs.back().epoch);
  auto px = [&](double epoch) { return kLeft + (epoch - first) / (last - first) * pw; };
  auto py = [&](double v) { return kTop + (kYMax - std::clamp(v, 0.0, kYMax)) / kYMax * ph; };
  auto num = [](double v) { return fmt("%.2f", v); };

  const std::string heading =
      !title.empty() ? title
                     : (result.config.mode == EvalMode::in_sample ? "Mapping accuracy on training pairs (in-sample)"
                                                                  : "Mapping accuracy on held-out pairs");

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << esc(heading)
      << "</text>\n";

  // Axes, grid and ticks.
  out << "<g class=\"axes\" stroke=\"#444\" stroke-width=\"1\">\n";
  out << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop + ph) << "\" x2=\"" << num(kLeft + pw) << "\" y2=\""
      << num(kTop + ph) << "\"/>\n";
  out << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(kLeft) << "\" y2=\""
      << num(kTop + ph) << "\"/>\n";
  out << "</g>\n<g class=\"yticks\">\n";
  for (int i = 0; i <= 5; ++i) {
    const double v = 0.2 * i;
    out << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(py(v)) << "\" x2=\"" << num(kLeft + pw) << "\" y2=\""
        << num(py(v)) << "\" stroke=\"#ddd\"/>\n";
    out << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(py(v) + 4) << "\" text-anchor=\"end\">"
        << fmt("%.1f", v) << "</text>\n";
  }
  out << "</g>\n<g class=\"xticks\">\n";
  const auto e0 = recs.front().epoch;
  const auto e1 = recs.back().epoch;
  const std::size_t step = tick_step(e1 - e0);
  std::vector<std::size_t> ticks = {e0};
  for (std::size_t e = (e0 / step + 1) * step; e <= e1; e += step)
    if (e != e0) ticks.push_back(e);
  for (std::size_t e : ticks) {
    const double x = px(static_cast<double>(e));
    out << "<line x1=\"" << num(x) << "\" y1=\"" << num(kTop + ph) << "\" x2=\"" << num(x) << "\" y2=\""
        << num(kTop + ph + 5) << "\" stroke=\"#444\"/>\n";
    out << "<text x=\"" << num(x) << "\" y=\"" << num(kTop + ph + 19) << "\" text-anchor=\"middle\">" << e
        << "</text>\n";
  }
  out << "</g>\n";
  out << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 14) << "\" text-anchor=\"middle\">epoch</text>\n";
  out << "<text x=\"16\" y=\"" << num(kTop + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << num(kTop + ph / 2) << ")\">score</text>\n";

  struct Series {
    std::string name;
    std::string color;
    std::function<double(const MetricRecord&)> value;
    double baseline;
  };
  std::vector<Series> series;
  series.push_back({"mean_cosine", "#222222", [](const MetricRecord& r) { return r.mean_cosine; },
                    result.baseline.mean_cosine});
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const std::size_t k = ks[i];
    auto it = result.baseline.lmd_acc.find(k);
    series.push_back({"lmd_acc@" + std::to_string(k), kPalette[i % std::size(kPalette)],
                      [k](const MetricRecord& r) { return r.lmd_acc.at(k); },
                      it == result.baseline.lmd_acc.end() ? 0.0 : it->second});
  }

  out << "<g class=\"baseline\" stroke-dasharray=\"6 4\" stroke-width=\"1\" opacity=\"0.7\">\n";
  for (const auto& s : series)
    out << "<line data-metric=\"" << s.name << "\" x1=\"" << num(kLeft) << "\" y1=\"" << num(py(s.baseline))
        << "\" x2=\"" << num(kLeft + pw) << "\" y2=\"" << num(py(s.baseline)) << "\" stroke=\"" << s.color << "\"/>\n";
  out << "</g>\n<g class=\"curves\" fill=\"none\" stroke-width=\"1.8\">\n";
  for (const auto& s : series) {
    out << "<polyline data-metric=\"" << s.name << "\" stroke=\"" << s.color << "\" points=\"";
    for (std::size_t i = 0; i < recs.size(); ++i)
      out << (i ? " " : "") << num(px(static_cast<double>(recs[i].epoch))) << ',' << num(py(s.value(recs[i])));
    out << "\"/>\n";
  }
  out << "</g>\n<g class=\"legend\">\n";
  const double lx = kLeft + pw + 20;
  double ly = kTop + 10;
  for (const auto& s : series) {
    out << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(lx + 24) << "\" y2=\"" << num(ly)
        << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << num(lx + 30) << "\" y=\"" << num(ly + 4) << "\">" << s.name << "</text>\n";
    ly += 20;
  }
  out << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(lx + 24) << "\" y2=\"" << num(ly)
      << "\" stroke=\"#444\" stroke-dasharray=\"6 4\"/>\n";
  out << "<text x=\"" << num(lx + 30) << "\" y=\"" << num(ly + 4) << "\">closed-form Procrustes</text>\n";
  out << "</g>\n</svg>\n";
}

void emit_plot(const ExperimentResult& result, const std::filesystem::path& path, const std::string& title) {
  std::ostringstream buf;
  write_plot(result, buf, title);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << buf.str();
  out.flush();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace lmd
