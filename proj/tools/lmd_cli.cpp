// lmd: train embeddings, fit closed-form Procrustes maps and run the mapping
// experiments from the command line.
//
// Exit status: 0 success, 1 usage error, 2 data error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lmd/cbow.hpp"
#include "lmd/embedding_io.hpp"
#include "lmd/error.hpp"
#include "lmd/experiments.hpp"
#include "lmd/lexicon.hpp"
#include "lmd/lmd_metrics.hpp"
#include "lmd/mapper.hpp"
#include "lmd/procrustes.hpp"

namespace {

constexpr int kUsageError = 1;
constexpr int kDataError = 2;

std::string fmt(const char* pattern, double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

void print_dropped(const std::vector<lmd::DroppedPair>& dropped) {
  if (dropped.empty()) return;
  std::cout << "dropped " << dropped.size() << " out-of-vocabulary pair(s)\n";
  for (const auto& d : dropped) {
    std::cerr << "  drop " << d.pair.source << '\t' << d.pair.target << " (";
    if (d.source_oov) std::cerr << "source";
    if (d.source_oov && d.target_oov) std::cerr << "+";
    if (d.target_oov) std::cerr << "target";
    std::cerr << " OOV)\n";
  }
}

void print_accuracy(const std::map<std::size_t, double>& acc) {
  for (const auto& [k, v] : acc) std::cout << "  lmd_acc@" << k << " = " << fmt("%.4f", v) << '\n';
}

struct TrainEmbeddingsArgs {
  std::string corpus;
  std::string out;
  lmd::CbowConfig cbow;
};

int cmd_train_embeddings(const TrainEmbeddingsArgs& a) {
  std::ifstream in(a.corpus);
  if (!in) throw lmd::IoError("cannot open corpus '" + a.corpus + "'");
  const std::vector<std::string> lines = lmd::read_lines(in);
  const lmd::CbowResult r = lmd::train_cbow(lines, a.cbow, [](std::size_t epoch, double loss) {
    std::cout << "epoch " << epoch << " loss " << fmt("%.6f", loss) << '\n';
  });
  lmd::save_word2vec_text(r.space, a.out);
  std::cout << "vocab " << r.space.size() << " dim " << r.space.dim() << " -> " << a.out << '\n';
  return 0;
}

struct ProcrustesArgs {
  std::string src;
  std::string tgt;
  std::string lexicon;
  std::vector<std::size_t> ks = {1, 3, 5, 10};
  bool normalize = true;
  std::string save_map;
};

int cmd_procrustes(const ProcrustesArgs& a) {
  const lmd::EmbeddingSpace src_raw = lmd::load_word2vec_text(a.src);
  const lmd::EmbeddingSpace tgt_raw = lmd::load_word2vec_text(a.tgt);
  if (src_raw.dim() != tgt_raw.dim())
    throw lmd::DimensionError("source dim " + std::to_string(src_raw.dim()) + " ≠ target dim " +
                              std::to_string(tgt_raw.dim()));
  const lmd::BilingualLexicon lex = lmd::load_lexicon(a.lexicon);

  const lmd::NeighborIndex index = lmd::NeighborIndex::from_space(tgt_raw);
  const lmd::EmbeddingSpace src = a.normalize ? lmd::normalize_rows(src_raw).space : src_raw;
  const lmd::EmbeddingSpace& tgt = a.normalize ? index.space() : tgt_raw;

  const lmd::FilterResult f = lmd::filter_by_vocab(lex, src, tgt);
  print_dropped(f.dropped);
  if (f.kept.empty()) throw lmd::InsufficientDataError("no lexicon pair is in both vocabularies");
  const lmd::PairedMatrices pm = lmd::to_matrices(f.kept, src, tgt);
  const lmd::ProcrustesResult fit = lmd::orthogonal_procrustes(pm.x, pm.y);

  std::vector<std::string> truths;
  for (const auto& p : f.kept) truths.push_back(p.target);
  const lmd::Matrix pred = lmd::apply_map(pm.x, fit.r);
  const auto acc = lmd::lmd_accuracy(index, pred, truths, a.ks);

  std::cout << "pairs " << pm.size() << " dim " << src.dim() << '\n';
  std::cout << "residual " << fmt("%.9g", fit.residual) << '\n';
  std::cout << "mean_cosine " << fmt("%.6f", lmd::mean_cosine(pred, pm.y).mean) << '\n';
  print_accuracy(acc.accuracy);
  if (!a.save_map.empty()) {
    lmd::save_mapper(lmd::Mapper(std::vector<lmd::Matrix>{fit.r}), a.save_map);
    std::cout << "map -> " << a.save_map << '\n';
  }
  return 0;
}

struct ExperimentArgs {
  std::string src;
  std::string tgt;
  std::string lexicon;
  std::string mode = "in-sample";
  double train_fraction = 0.8;
  std::uint64_t seed = 1;
  std::size_t hidden = 256;
  double lr = 0.05;
  std::size_t batch = 32;
  std::size_t epochs = 200;
  std::vector<std::size_t> ks = {1, 3, 5, 10};
  bool normalize = true;
  std::size_t workers = 1;
  std::size_t slope_window = 10;
  std::size_t log_every = 10;
  std::string csv = "experiment.csv";
  std::string svg = "experiment.svg";
  std::string title;
};

int cmd_experiment(const ExperimentArgs& a) {
  if (a.epochs < 2) throw lmd::ConfigError("--epochs must be at least 2 so the chart has a line to draw");
  const lmd::EmbeddingSpace src = lmd::load_word2vec_text(a.src);
  const lmd::EmbeddingSpace tgt = lmd::load_word2vec_text(a.tgt);
  const lmd::BilingualLexicon lex = lmd::load_lexicon(a.lexicon);

  lmd::ExperimentConfig cfg;
  cfg.mode = lmd::parse_eval_mode(a.mode);
  cfg.mapper.d_in = src.dim();
  cfg.mapper.d_out = tgt.dim();
  cfg.mapper.hidden = a.hidden;
  cfg.mapper.lr = a.lr;
  cfg.mapper.batch_size = a.batch;
  cfg.mapper.epochs = a.epochs;
  cfg.mapper.seed = a.seed;
  cfg.ks = a.ks;
  cfg.train_fraction = a.train_fraction;
  cfg.split_seed = a.seed;
  cfg.normalize = a.normalize;
  cfg.workers = a.workers;

  const lmd::ExperimentResult r = lmd::run_experiment(src, tgt, lex, cfg, std::nullopt, [&](const lmd::MetricRecord& rec) {
    if (a.log_every > 0 && (rec.epoch % a.log_every == 0 || rec.epoch == 1)) {
      std::cout << "epoch " << rec.epoch << " loss " << fmt("%.6f", rec.train_loss) << " cos "
                << fmt("%.4f", rec.mean_cosine);
      for (const auto& [k, v] : rec.lmd_acc) std::cout << " @" << k << ' ' << fmt("%.4f", v);
      std::cout << '\n';
    }
  });
  print_dropped(r.dropped);
  lmd::emit_csv(r, a.csv);
  lmd::emit_plot(r, a.svg, a.title);

  const auto& last = r.records.back();
  std::cout << "mode " << lmd::to_string(cfg.mode) << " train_pairs " << r.train_pairs << " eval_pairs "
            << r.eval_pairs << '\n';
  std::cout << "final epoch " << last.epoch << " train_loss " << fmt("%.6f", last.train_loss) << " mean_cosine "
            << fmt("%.6f", last.mean_cosine) << '\n';
  print_accuracy(last.lmd_acc);
  std::cout << "baseline (closed-form Procrustes) residual " << fmt("%.6g", r.baseline.residual) << " mean_cosine "
            << fmt("%.6f", r.baseline.mean_cosine) << '\n';
  print_accuracy(r.baseline.lmd_acc);

  const std::size_t k1 = r.config.ks.front();
  const std::size_t window = std::min(a.slope_window, r.records.size());
  if (window >= 2) {
    std::vector<lmd::SeriesPoint> series;
    for (std::size_t i = r.records.size() - window; i < r.records.size(); ++i)
      series.push_back({static_cast<double>(r.records[i].epoch), r.records[i].lmd_acc.at(k1)});
    const auto slopes = lmd::rolling_ols_slope(series, window);
    std::cout << "rolling OLS slope of lmd_acc@" << k1 << " over last " << window << " epochs "
              << fmt("%.6g", slopes.back()) << '\n';
  }
  std::cout << "csv -> " << a.csv << '\n';
  std::cout << "svg -> " << a.svg << '\n';
  return 0;
}

struct PlotArgs {
  std::string csv;
  std::string svg = "experiment.svg";
  std::string title = "Mapping metrics per epoch";
};

int cmd_plot(const PlotArgs& a) {
  const lmd::ExperimentResult r = lmd::load_csv(a.csv);
  lmd::emit_plot(r, a.svg, a.title);
  std::cout << "svg -> " << a.svg << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Word-embedding mapping toolkit with language-model-distance metrics"};
  app.require_subcommand(1);

  TrainEmbeddingsArgs te;
  auto* train = app.add_subcommand("train-embeddings", "Train CBOW embeddings on a one-sentence-per-line corpus");
  train->add_option("--corpus", te.corpus, "UTF-8 corpus, one sentence per line")->required();
  train->add_option("--out", te.out, "Output word2vec text file")->required();
  train->add_option("--dim", te.cbow.dim, "Embedding dimension")->capture_default_str();
  train->add_option("--window", te.cbow.window, "Symmetric context window")->capture_default_str();
  train->add_option("--negatives", te.cbow.negatives, "Negative samples per example")->capture_default_str();
  train->add_option("--epochs", te.cbow.epochs, "Training epochs")->capture_default_str();
  train->add_option("--lr", te.cbow.initial_lr, "Initial learning rate (decays linearly to lr/10)")->capture_default_str();
  train->add_option("--min-count", te.cbow.min_count, "Minimum token frequency")->capture_default_str();
  train->add_option("--seed", te.cbow.seed, "Random seed")->capture_default_str();

  ProcrustesArgs pa;
  auto* proc = app.add_subcommand("procrustes", "Fit the closed-form orthogonal map on a bilingual lexicon");
  proc->add_option("--src", pa.src, "Source embeddings (word2vec text)")->required();
  proc->add_option("--tgt", pa.tgt, "Target embeddings (word2vec text)")->required();
  proc->add_option("--lexicon", pa.lexicon, "Tab-separated lexicon")->required();
  proc->add_option("--k", pa.ks, "Neighborhood sizes, comma separated")->delimiter(',')->capture_default_str();
  proc->add_flag("--normalize,!--no-normalize", pa.normalize, "Unit-normalize rows before fitting (default on)");
  proc->add_option("--save-map", pa.save_map, "Write R as a linear mapper checkpoint");

  ExperimentArgs ea;
  auto* exp = app.add_subcommand("experiment", "Train the neural mapper and record per-epoch metrics");
  exp->add_option("--src", ea.src, "Source embeddings (word2vec text)")->required();
  exp->add_option("--tgt", ea.tgt, "Target embeddings (word2vec text)")->required();
  exp->add_option("--lexicon", ea.lexicon, "Tab-separated lexicon")->required();
  exp->add_option("--mode", ea.mode, "in-sample or held-out")
      ->check(CLI::IsMember({"in-sample", "held-out"}))
      ->capture_default_str();
  exp->add_option("--train-fraction", ea.train_fraction, "Train share of pairs in held-out mode")->capture_default_str();
  exp->add_option("--seed", ea.seed, "Seed for mapper init, shuffling and the split")->capture_default_str();
  exp->add_option("--hidden", ea.hidden, "Hidden units (0 = linear map)")->capture_default_str();
  exp->add_option("--lr", ea.lr, "SGD learning rate")->capture_default_str();
  exp->add_option("--batch", ea.batch, "Minibatch size")->capture_default_str();
  exp->add_option("--epochs", ea.epochs, "Training epochs")->capture_default_str();
  exp->add_option("--k", ea.ks, "Neighborhood sizes, comma separated")->delimiter(',')->capture_default_str();
  exp->add_flag("--normalize,!--no-normalize", ea.normalize, "Unit-normalize rows (default on)");
  exp->add_option("--workers", ea.workers, "Threads for evaluation")->capture_default_str();
  exp->add_option("--slope-window", ea.slope_window, "Window of the rolling OLS slope")->capture_default_str();
  exp->add_option("--log-every", ea.log_every, "Print metrics every N epochs (0 = quiet)")->capture_default_str();
  exp->add_option("--csv", ea.csv, "Output CSV")->capture_default_str();
  exp->add_option("--svg", ea.svg, "Output SVG")->capture_default_str();
  exp->add_option("--title", ea.title, "Plot title (default depends on mode)");

  PlotArgs pl;
  auto* plot = app.add_subcommand("plot", "Re-render the SVG chart from an experiment CSV");
  plot->add_option("--csv", pl.csv, "Experiment CSV")->required();
  plot->add_option("--svg", pl.svg, "Output SVG")->capture_default_str();
  plot->add_option("--title", pl.title, "Plot title")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (*train) return cmd_train_embeddings(te);
    if (*proc) return cmd_procrustes(pa);
    if (*exp) return cmd_experiment(ea);
    if (*plot) return cmd_plot(pl);
  } catch (const lmd::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsageError;
}
