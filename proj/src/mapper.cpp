#include "lmd/mapper.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "lmd/error.hpp"
#include "lmd/random.hpp"

namespace lmd {

namespace {

void fill_uniform(Matrix& w, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(w.rows()));
  for (double& v : w.data()) v = rng.uniform(-bound, bound);
}

struct Activations {
  std::vector<double> hidden;  // tanh(x W1); empty for the linear form
  std::vector<double> output;
};

Activations run_forward(const Mapper& m, std::span<const double> x) {
  Activations a;
  if (m.is_linear()) {
    a.output = vecmat(x, m.layers()[0]);
  } else {
    a.hidden = vecmat(x, m.layers()[0]);
    for (double& h : a.hidden) h = std::tanh(h);
    a.output = vecmat(a.hidden, m.layers()[1]);
  }
  return a;
}

bool is_zero(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double e) { return e == 0.0; });
}

void check_shapes(const Mapper& m, const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows())
    throw DimensionError("mapper: " + std::to_string(x.rows()) + " inputs but " + std::to_string(y.rows()) +
                         " targets");
  if (x.cols() != m.d_in())
    throw DimensionError("mapper: input width " + std::to_string(x.cols()) + " ≠ " + std::to_string(m.d_in()));
  if (y.cols() != m.d_out())
    throw DimensionError("mapper: target width " + std::to_string(y.cols()) + " ≠ " + std::to_string(m.d_out()));
}

Gradients accumulate(const Mapper& m, const Matrix& x, const Matrix& y, std::span<const std::size_t> rows) {
  Gradients g;
  for (const auto& w : m.layers()) g.layers.emplace_back(w.rows(), w.cols(), 0.0);
  double loss_sum = 0.0;
  std::vector<double> dz;

  for (std::size_t r : rows) {
    auto xr = x.row(r);
    auto yr = y.row(r);
    Activations a = run_forward(m, xr);
    if (is_zero(a.output) || is_zero(yr)) {
      ++g.skipped;
      continue;
    }
    loss_sum += cosine_loss(a.output, yr);
    const std::vector<double> dy = cosine_loss_gradient(a.output, yr);
    ++g.used;

    if (m.is_linear()) {
      Matrix& gw = g.layers[0];
      for (std::size_t i = 0; i < xr.size(); ++i) {
        if (xr[i] == 0.0) continue;
        auto grow = gw.row(i);
        for (std::size_t j = 0; j < dy.size(); ++j) grow[j] += xr[i] * dy[j];
      }
      continue;
    }

    const Matrix& w2 = m.layers()[1];
    Matrix& gw1 = g.layers[0];
    Matrix& gw2 = g.layers[1];
    dz.assign(a.hidden.size(), 0.0);
    for (std::size_t i = 0; i < a.hidden.size(); ++i) {
      auto w2row = w2.row(i);
      auto g2row = gw2.row(i);
      const double h = a.hidden[i];
      double back = 0.0;
      for (std::size_t j = 0; j < dy.size(); ++j) {
        g2row[j] += h * dy[j];
        back += w2row[j] * dy[j];
      }
      dz[i] = back * (1.0 - h * h);
    }
    for (std::size_t i = 0; i < xr.size(); ++i) {
      if (xr[i] == 0.0) continue;
      auto g1row = gw1.row(i);
      for (std::size_t j = 0; j < dz.size(); ++j) g1row[j] += xr[i] * dz[j];
    }
  }

  if (g.used > 0) {
    const double inv = 1.0 / static_cast<double>(g.used);
    for (auto& w : g.layers)
      for (double& v : w.data()) v *= inv;
    g.mean_loss = loss_sum * inv;
  }
  return g;
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void MapperConfig::validate() const {
  if (d_in < 1 || d_out < 1) throw ConfigError("mapper: d_in and d_out must be >= 1");
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("mapper: learning rate must be finite and >= 0");
  if (batch_size < 1) throw ConfigError("mapper: batch size must be >= 1");
  if (epochs < 1) throw ConfigError("mapper: epochs must be >= 1");
}

Mapper::Mapper(const MapperConfig& config) {
  config.validate();
  Rng rng(config.seed);
  if (config.hidden == 0) {
    layers_.emplace_back(config.d_in, config.d_out);
  } else {
    layers_.emplace_back(config.d_in, config.hidden);
    layers_.emplace_back(config.hidden, config.d_out);
  }
  for (auto& w : layers_) fill_uniform(w, rng);
}

Mapper::Mapper(std::vector<Matrix> layers) : layers_(std::move(layers)) {
  if (layers_.empty() || layers_.size() > 2) throw DimensionError("mapper needs one or two weight matrices");
  for (const auto& w : layers_) {
    if (w.rows() == 0 || w.cols() == 0) throw DimensionError("mapper: empty weight matrix");
    if (!all_finite(w.data())) throw DegenerateVectorError("mapper: non-finite weight");
  }
  if (layers_.size() == 2 && layers_[0].cols() != layers_[1].rows())
    throw DimensionError("mapper: hidden widths disagree (" + std::to_string(layers_[0].cols()) + " vs " +
                         std::to_string(layers_[1].rows()) + ")");
}

std::vector<double> Mapper::forward(std::span<const double> x) const {
  if (x.size() != d_in())
    throw DimensionError("mapper: input width " + std::to_string(x.size()) + " ≠ " + std::to_string(d_in()));
  return run_forward(*this, x).output;
}

Matrix Mapper::forward(const Matrix& x) const {
  if (x.cols() != d_in())
    throw DimensionError("mapper: input width " + std::to_string(x.cols()) + " ≠ " + std::to_string(d_in()));
  Matrix out(x.rows(), d_out());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto y = run_forward(*this, x.row(r)).output;
    std::copy(y.begin(), y.end(), out.row(r).begin());
  }
  return out;
}

double cosine_loss(std::span<const double> y_hat, std::span<const double> y) {
  if (y_hat.size() != y.size()) throw DimensionError("cosine_loss: width mismatch");
  const double na = norm2(y_hat);
  const double nb = norm2(y);
  if (na == 0.0 || nb == 0.0) throw DegenerateVectorError("cosine_loss: zero-norm vector");
  const double c = std::clamp(dot(y_hat, y) / (na * nb), -1.0, 1.0);
  return 1.0 - c;
}

std::vector<double> cosine_loss_gradient(std::span<const double> y_hat, std::span<const double> y) {
  if (y_hat.size() != y.size()) throw DimensionError("cosine_loss_gradient: width mismatch");
  const double na = norm2(y_hat);
  const double nb = norm2(y);
  if (na == 0.0 || nb == 0.0) throw DegenerateVectorError("cosine_loss_gradient: zero-norm vector");
  const double c = dot(y_hat, y) / (na * nb);
  std::vector<double> g(y.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = -(y[i] / (na * nb) - c * y_hat[i] / (na * na));
  return g;
}

Gradients gradient(const Mapper& m, const Matrix& x, const Matrix& y) {
  check_shapes(m, x, y);
  std::vector<std::size_t> rows(x.rows());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return accumulate(m, x, y, rows);
}

EpochReport train_epoch(Mapper& m, const Matrix& x, const Matrix& y, const MapperConfig& config,
                        std::size_t epoch_index) {
  config.validate();
  check_shapes(m, x, y);
  if (x.rows() == 0) throw InsufficientDataError("train_epoch: no rows");

  Rng rng(mix_seed(config.seed, epoch_index));
  const std::vector<std::size_t> order = rng.permutation(x.rows());

  EpochReport report;
  double loss_sum = 0.0;
  for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
    const std::size_t stop = std::min(order.size(), start + config.batch_size);
    const Gradients g = accumulate(m, x, y, std::span<const std::size_t>(order).subspan(start, stop - start));
    report.used += g.used;
    report.skipped += g.skipped;
    if (g.used == 0) continue;
    loss_sum += g.mean_loss * static_cast<double>(g.used);
    if (config.lr == 0.0) continue;
    for (std::size_t l = 0; l < m.layers().size(); ++l) {
      auto w = m.layers()[l].data();
      auto gw = g.layers[l].data();
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= config.lr * gw[i];
    }
  }
  if (report.used == 0) throw InsufficientDataError("train_epoch: every row is degenerate");
  for (const auto& w : m.layers())
    if (!all_finite(w.data())) throw DegenerateVectorError("train_epoch: weights diverged to non-finite values");
  report.mean_loss = loss_sum / static_cast<double>(report.used);
  return report;
}

double grad_check(const Mapper& m, std::span<const double> x, std::span<const double> y, double epsilon) {
  Matrix xm(1, x.size());
  Matrix ym(1, y.size());
  std::copy(x.begin(), x.end(), xm.row(0).begin());
  std::copy(y.begin(), y.end(), ym.row(0).begin());
  const Gradients g = gradient(m, xm, ym);
  if (g.used == 0) throw DegenerateVectorError("grad_check: degenerate sample");
  return grad_check(m, x, y, epsilon, g.layers);
}

double grad_check(const Mapper& m, std::span<const double> x, std::span<const double> y, double epsilon,
                  const std::vector<Matrix>& analytic) {
  if (!(epsilon > 0.0)) throw ConfigError("grad_check: epsilon must be > 0");
  if (analytic.size() != m.layers().size()) throw DimensionError("grad_check: layer count mismatch");
  Mapper probe = m;
  double worst = 0.0;
  for (std::size_t l = 0; l < probe.layers().size(); ++l) {
    auto w = probe.layers()[l].data();
    auto a = analytic[l].data();
    if (a.size() != w.size()) throw DimensionError("grad_check: gradient shape mismatch");
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double orig = w[i];
      w[i] = orig + epsilon;
      const double plus = cosine_loss(probe.forward(x), y);
      w[i] = orig - epsilon;
      const double minus = cosine_loss(probe.forward(x), y);
      w[i] = orig;
      const double numeric = (plus - minus) / (2.0 * epsilon);
      const double rel = std::abs(a[i] - numeric) / std::max(1e-12, std::abs(a[i]) + std::abs(numeric));
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

void write_mapper(const Mapper& m, std::ostream& out) {
  out << "mapper " << m.layers().size() << '\n';
  for (std::size_t l = 0; l < m.layers().size(); ++l)
    out << (l ? " " : "") << m.layers()[l].rows() << 'x' << m.layers()[l].cols();
  out << '\n';
  for (std::size_t l = 0; l < m.layers().size(); ++l) {
    const Matrix& w = m.layers()[l];
    for (std::size_t r = 0; r < w.rows(); ++r) {
      out << 'w' << l + 1 << '_' << r;
      for (double v : w.row(r)) out << ' ' << fmt17(v);
      out << '\n';
    }
  }
}

void save_mapper(const Mapper& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_mapper(m, out);
  out.flush();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Mapper read_mapper(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw FormatError("missing mapper header", 1);
  std::istringstream head(line);
  std::string magic;
  std::size_t count = 0;
  if (!(head >> magic >> count) || magic != "mapper" || count < 1 || count > 2)
    throw FormatError("expected 'mapper <1|2>'", 1);

  ++line_no;
  if (!std::getline(in, line)) throw FormatError("missing shape line", line_no);
  std::istringstream shapes(line);
  std::vector<Matrix> layers;
  for (std::size_t l = 0; l < count; ++l) {
    std::string s;
    std::size_t rows = 0;
    std::size_t cols = 0;
    if (!(shapes >> s)) throw FormatError("missing shape for layer " + std::to_string(l + 1), line_no);
    const auto pos = s.find('x');
    if (pos == std::string::npos || std::from_chars(s.data(), s.data() + pos, rows).ptr != s.data() + pos ||
        std::from_chars(s.data() + pos + 1, s.data() + s.size(), cols).ptr != s.data() + s.size() || rows == 0 ||
        cols == 0)
      throw FormatError("bad shape '" + s + "'", line_no);
    layers.emplace_back(rows, cols);
  }

  for (std::size_t l = 0; l < count; ++l) {
    Matrix& w = layers[l];
    for (std::size_t r = 0; r < w.rows(); ++r) {
      ++line_no;
      if (!std::getline(in, line)) throw FormatError("truncated weights", line_no);
      std::istringstream row(line);
      std::string label;
      row >> label;
      const std::string expected = "w" + std::to_string(l + 1) + "_" + std::to_string(r);
      if (label != expected) throw FormatError("expected row label '" + expected + "'", line_no);
      for (std::size_t c = 0; c < w.cols(); ++c) {
        std::string tok;
        double v = 0.0;
        if (!(row >> tok)) throw FormatError("row width " + std::to_string(c) + " ≠ " + std::to_string(w.cols()), line_no);
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v))
          throw FormatError("bad value '" + tok + "'", line_no);
        w(r, c) = v;
      }
      std::string extra;
      if (row >> extra) throw FormatError("row wider than " + std::to_string(w.cols()), line_no);
    }
  }
  return Mapper(std::move(layers));
}

Mapper load_mapper(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mapper file '" + path.string() + "'");
  try {
    return read_mapper(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace lmd
