#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lmd/embedding_io.hpp"
#include "lmd/lexicon.hpp"
#include "lmd/lmd_metrics.hpp"
#include "lmd/mapper.hpp"

namespace lmd {

enum class EvalMode {
  in_sample,  // evaluate on the training pairs
  held_out,   // evaluate on a disjoint test split
};

std::string to_string(EvalMode mode);
EvalMode parse_eval_mode(const std::string& text);  // "in-sample" | "held-out"

struct ExperimentConfig {
  EvalMode mode = EvalMode::in_sample;
  MapperConfig mapper;
  std::vector<std::size_t> ks = {1, 3, 5, 10};
  double train_fraction = 0.8;  // held_out only
  std::uint64_t split_seed = 1;
  bool normalize = true;  // unit rows before fitting and scoring
  std::size_t workers = 1;
};

// Closed-form Procrustes map fitted on the training pairs, scored once on the
// evaluation pairs with the same index and k list as the epoch rows.
struct BaselineRecord {
  double train_loss = 0.0;  // mean cosine loss of X R against Y on the training pairs
  double mean_cosine = 0.0;
  std::map<std::size_t, double> lmd_acc;
  double residual = 0.0;  // ||X R - Y||_F on the training pairs
};

struct ExperimentResult {
  std::vector<MetricRecord> records;  // epochs 1..n, contiguous
  BaselineRecord baseline;
  ExperimentConfig config;
  std::size_t train_pairs = 0;
  std::size_t eval_pairs = 0;
  std::vector<DroppedPair> dropped;
};

using RecordCallback = std::function<void(const MetricRecord&)>;

// Filters the lexicon against both spaces (at least 10 usable pairs), builds
// the train/eval sets for the mode, fits the Procrustes baseline, then trains
// the mapper for config.mapper.epochs epochs, scoring the eval set after each.
// `initial` replaces the randomly initialized mapper when given.
ExperimentResult run_experiment(const EmbeddingSpace& src, const EmbeddingSpace& tgt, const BilingualLexicon& lex,
                                const ExperimentConfig& config, std::optional<Mapper> initial = std::nullopt,
                                const RecordCallback& on_epoch = {});

// CSV: "epoch,train_loss,mean_cosine,lmd_acc@<k>..." then one row per epoch
// and a final row whose epoch field is "baseline". 9 significant digits.
void write_csv(const ExperimentResult& result, std::ostream& out);
void emit_csv(const ExperimentResult& result, const std::filesystem::path& path);

// Reads records, baseline and k list back from a CSV written by emit_csv.
ExperimentResult read_csv(std::istream& in);
ExperimentResult load_csv(const std::filesystem::path& path);

// Self-contained SVG line chart, x = epoch, y in [0, 1.05]: one polyline per
// metric plus dashed horizontal lines for the baseline. Needs >= 2 records.
// Output bytes depend only on the inputs. An empty title picks one from the mode.
void write_plot(const ExperimentResult& result, std::ostream& out, const std::string& title = "");
void emit_plot(const ExperimentResult& result, const std::filesystem::path& path, const std::string& title = "");

}  // namespace lmd
