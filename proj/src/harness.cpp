#include "kalman/harness.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "kalman/ekf.hpp"
#include "kalman/enkf.hpp"
#include "kalman/errors.hpp"
#include "kalman/eukf.hpp"
#include "kalman/kf.hpp"
#include "kalman/random.hpp"
#include "kalman/ukf.hpp"

namespace kalman {

namespace {

constexpr FilterKind kAllFilters[] = {FilterKind::kEnkf,  FilterKind::kEkf,   FilterKind::kKf,
                                      FilterKind::kUkf,   FilterKind::kEukfa, FilterKind::kEukfc};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

double parse_double(std::string_view s, std::string_view key) {
  const std::string text(trim(s));
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE) {
    throw std::invalid_argument("invalid number '" + text + "' for " + std::string(key));
  }
  return v;
}

template <typename Int>
Int parse_int(std::string_view s, std::string_view key) {
  s = trim(s);
  Int v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::invalid_argument("invalid integer '" + std::string(s) + "' for " +
                                std::string(key));
  }
  return v;
}

Vector parse_vector(std::string_view s, std::string_view key) {
  const auto parts = split(s, ',');
  Vector v(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = parse_double(parts[i], key);
  }
  return v;
}

/// Rows separated by ';', entries by ','.
Matrix parse_matrix(std::string_view s, std::string_view key) {
  const auto rows = split(s, ';');
  std::vector<Vector> parsed;
  for (auto row : rows) parsed.push_back(parse_vector(row, key));
  const Eigen::Index cols = parsed.front().size();
  Matrix m(static_cast<Eigen::Index>(parsed.size()), cols);
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    if (parsed[i].size() != cols) {
      throw std::invalid_argument("ragged matrix for " + std::string(key));
    }
    m.row(static_cast<Eigen::Index>(i)) = parsed[i].transpose();
  }
  return m;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double output_error(const SystemModel& model, const Vector& y, const Vector& mean, int k) {
  const Vector z = y - measure(model, mean, k);
  return z.size() == 1 ? z[0] : z.norm();
}

FilterMetrics diverged_metrics() {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  FilterMetrics m;
  m.trace = nan;
  m.output_error = nan;
  m.error_norm = nan;
  m.diverged = true;
  return m;
}

struct FilterRun {
  std::vector<FilterMetrics> metrics;
  std::string divergence;
};

FilterRun run_filter(FilterKind kind, const ModelSetup& setup, const Trajectory& truth,
                     const ExperimentConfig& cfg) {
  const SystemModel& model = setup.model;
  const Vector u = model.zero_input();
  FilterRun run;
  run.metrics.reserve(static_cast<std::size_t>(cfg.horizon));

  StateEstimate est{setup.x0, setup.p0, 0};
  std::optional<Ensemble> ensemble;
  try {
    if (kind == FilterKind::kEnkf) ensemble = enkf_init(est, cfg.ensemble_size, cfg.seed);
    for (int k = 0; k < cfg.horizon; ++k) {
      const Vector& y = truth.measurements[static_cast<std::size_t>(k + 1)];
      Matrix gain;
      switch (kind) {
        case FilterKind::kKf: {
          auto [next, rec] = kf_step(*setup.linear, est, u, y);
          est = std::move(next);
          gain = std::move(rec.gain);
          break;
        }
        case FilterKind::kEkf: {
          auto [next, rec] = ekf_step(model, est, u, y);
          est = std::move(next);
          gain = std::move(rec.gain);
          break;
        }
        case FilterKind::kUkf: {
          auto [next, rec] = ukf_step(model, est, u, y, cfg.alpha);
          est = std::move(next);
          gain = std::move(rec.gain);
          break;
        }
        case FilterKind::kEukfa: {
          auto [next, rec] = eukfa_step(model, est, u, y, cfg.alpha);
          est = std::move(next);
          gain = std::move(rec.gain);
          break;
        }
        case FilterKind::kEukfc: {
          auto [next, rec] = eukfc_step(model, est, u, y, cfg.alpha);
          est = std::move(next);
          gain = std::move(rec.gain);
          break;
        }
        case FilterKind::kEnkf: {
          auto result = enkf_step(model, *ensemble, u, y, cfg.threads);
          ensemble = std::move(result.ensemble);
          est = std::move(result.estimate);
          gain = std::move(result.record.gain);
          break;
        }
      }
      FilterMetrics m;
      m.trace = est.cov.trace();
      m.output_error = output_error(model, y, est.mean, est.step);
      m.error_norm = (truth.states[static_cast<std::size_t>(est.step)] - est.mean).norm();
      m.gain = std::move(gain);
      run.metrics.push_back(std::move(m));
    }
  } catch (const FilterError& e) {
    run.divergence = std::string(filter_name(kind)) + ": " + e.what();
    while (run.metrics.size() < static_cast<std::size_t>(cfg.horizon)) {
      run.metrics.push_back(diverged_metrics());
    }
  }
  return run;
}

}  // namespace

std::string_view filter_name(FilterKind kind) {
  switch (kind) {
    case FilterKind::kEnkf: return "enkf";
    case FilterKind::kEkf: return "ekf";
    case FilterKind::kKf: return "kf";
    case FilterKind::kUkf: return "ukf";
    case FilterKind::kEukfa: return "eukfa";
    case FilterKind::kEukfc: return "eukfc";
  }
  return "?";
}

FilterKind parse_filter(std::string_view name) {
  name = trim(name);
  for (auto kind : kAllFilters) {
    if (filter_name(kind) == name) return kind;
  }
  throw std::invalid_argument("unknown filter '" + std::string(name) +
                              "' (expected enkf, ekf, kf, ukf, eukfa, eukfc)");
}

std::vector<FilterKind> parse_filter_list(std::string_view list) {
  std::vector<FilterKind> out;
  for (auto part : split(list, ',')) {
    if (part.empty()) continue;
    const auto kind = parse_filter(part);
    if (std::find(out.begin(), out.end(), kind) == out.end()) out.push_back(kind);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void ExperimentConfig::validate() const {
  static const std::vector<std::string> models{"linear-ex1", "linear-ex2", "vdp", "lorenz",
                                               "custom"};
  if (std::find(models.begin(), models.end(), model) == models.end()) {
    throw std::invalid_argument("unknown model '" + model + "'");
  }
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be > 0");
  if (filters.empty()) throw std::invalid_argument("filter set is empty");
  const bool has_enkf =
      std::find(filters.begin(), filters.end(), FilterKind::kEnkf) != filters.end();
  if (has_enkf && ensemble_size < 2) throw std::invalid_argument("ensemble size must be >= 2");
  const bool linear = model != "vdp" && model != "lorenz";
  const bool has_kf = std::find(filters.begin(), filters.end(), FilterKind::kKf) != filters.end();
  if (has_kf && !linear) {
    throw std::invalid_argument("the kf filter needs a linear model, got '" + model + "'");
  }
  if (model == "custom" && (!custom_a || !custom_c)) {
    throw std::invalid_argument("custom model needs both A and C");
  }
  if (ts && !(*ts > 0.0)) throw std::invalid_argument("ts must be > 0");
  if (q && *q < 0.0) throw std::invalid_argument("q must be >= 0");
  if (r && !(*r > 0.0)) throw std::invalid_argument("r must be > 0");
  if (p0 && !(*p0 > 0.0)) throw std::invalid_argument("p0 must be > 0");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
}

void apply_config_value(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  if (key == "model") {
    cfg.model = std::string(value);
  } else if (key == "steps" || key == "horizon") {
    cfg.horizon = parse_int<int>(value, key);
  } else if (key == "seed") {
    cfg.seed = parse_int<std::uint64_t>(value, key);
  } else if (key == "alpha") {
    cfg.alpha = parse_double(value, key);
  } else if (key == "ensemble") {
    cfg.ensemble_size = parse_int<Eigen::Index>(value, key);
  } else if (key == "filters") {
    cfg.filters = parse_filter_list(value);
  } else if (key == "threads") {
    cfg.threads = parse_int<int>(value, key);
  } else if (key == "ts") {
    cfg.ts = parse_double(value, key);
  } else if (key == "mu") {
    cfg.mu = parse_double(value, key);
  } else if (key == "q") {
    cfg.q = parse_double(value, key);
  } else if (key == "r") {
    cfg.r = parse_double(value, key);
  } else if (key == "p0") {
    cfg.p0 = parse_double(value, key);
  } else if (key == "x0") {
    cfg.x0 = parse_vector(value, key);
  } else if (key == "A") {
    cfg.custom_a = parse_matrix(value, key);
  } else if (key == "C") {
    cfg.custom_c = parse_matrix(value, key);
  } else {
    throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
  }
}

void apply_config_text(ExperimentConfig& cfg, std::string_view text) {
  int line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = trim(line.substr(0, hash));
    }
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key = value");
    }
    apply_config_value(cfg, line.substr(0, eq), line.substr(eq + 1));
  }
}

void load_config_file(ExperimentConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  apply_config_text(cfg, buf.str());
}

LinearSystem example1_system() {
  const Matrix a = (Matrix(2, 2) << 2.4, 2.1, 0.0, -0.7).finished();
  const Matrix c = (Matrix(1, 2) << -0.4, -0.9).finished();
  return LinearSystem::constant(a, Matrix(), c, SpdMatrix::identity(2), SpdMatrix::identity(1),
                                "linear-ex1");
}

LinearSystem example2_system() {
  const Matrix a = (Matrix(2, 2) << 1.6, -1.0, 1.0, 0.0).finished();
  const Matrix c = (Matrix(1, 2) << 1.0, -0.3).finished();
  return LinearSystem::constant(a, Matrix(), c, SpdMatrix::scaled_identity(2, 0.1),
                                SpdMatrix::scaled_identity(1, 0.1), "linear-ex2");
}

ModelSetup build_model(const ExperimentConfig& cfg) {
  cfg.validate();
  ModelSetup setup;
  auto linear_with = [&](const Matrix& a, const Matrix& c, double q, double r) {
    return LinearSystem::constant(a, Matrix(), c, SpdMatrix::scaled_identity(a.rows(), q),
                                  SpdMatrix::scaled_identity(c.rows(), r), cfg.model);
  };
  if (cfg.model == "linear-ex1" || cfg.model == "linear-ex2") {
    const LinearSystem base = cfg.model == "linear-ex1" ? example1_system() : example2_system();
    const double q = cfg.q.value_or(base.Q(0).matrix()(0, 0));
    const double r = cfg.r.value_or(base.R(0).matrix()(0, 0));
    setup.linear = linear_with(base.A(0), base.C(0), q, r);
  } else if (cfg.model == "custom") {
    setup.linear = linear_with(*cfg.custom_a, *cfg.custom_c, cfg.q.value_or(1.0),
                               cfg.r.value_or(1.0));
  }
  if (setup.linear) {
    setup.model = setup.linear->to_model();
  } else if (cfg.model == "vdp") {
    setup.model = make_vdp(cfg.ts.value_or(0.01), cfg.mu.value_or(1.0), cfg.q.value_or(0.01),
                           cfg.r.value_or(1e-4));
  } else {
    setup.model = make_lorenz(cfg.ts.value_or(0.01), cfg.q.value_or(0.01), cfg.r.value_or(1e-4));
  }
  const Eigen::Index n = setup.model.state_dim;
  setup.x0 = cfg.x0.value_or(Vector::Ones(n));
  if (setup.x0.size() != n) {
    throw std::invalid_argument("x0 has length " + std::to_string(setup.x0.size()) +
                                ", model state dimension is " + std::to_string(n));
  }
  setup.p0 = SpdMatrix::scaled_identity(n, cfg.p0.value_or(1.0));
  return setup;
}

Trajectory simulate_truth(const SystemModel& model, const Vector& x0, int horizon,
                          std::uint64_t seed) {
  if (horizon < 1) throw std::invalid_argument("simulate_truth: horizon must be >= 1");
  if (x0.size() != model.state_dim) throw DimensionError("simulate_truth: x0 size mismatch");
  const Vector u = model.zero_input();
  Trajectory t;
  t.states.reserve(static_cast<std::size_t>(horizon) + 1);
  t.measurements.reserve(static_cast<std::size_t>(horizon) + 1);

  auto observe = [&](const Vector& x, int k) {
    NormalStream stream(seed, StreamKind::kTruthMeasurement, static_cast<std::uint64_t>(k), 0);
    const Matrix factor = psd_factor(model.R(k).matrix());
    return Vector(measure(model, x, k) + factor * stream.normal_vector(model.output_dim));
  };

  Vector x = x0;
  t.states.push_back(x);
  t.measurements.push_back(observe(x, 0));
  for (int k = 0; k < horizon; ++k) {
    NormalStream stream(seed, StreamKind::kTruthProcess, static_cast<std::uint64_t>(k), 0);
    const Matrix factor = psd_factor(model.Q(k).matrix());
    x = step_dynamics(model, x, u, k) + factor * stream.normal_vector(model.state_dim);
    if (!x.allFinite()) throw TruthDiverged("simulated state is not finite", k + 1);
    t.states.push_back(x);
    t.measurements.push_back(observe(x, k + 1));
  }
  return t;
}

std::optional<std::size_t> ExperimentResult::column_of(FilterKind kind) const {
  const auto it = std::find(filters.begin(), filters.end(), kind);
  if (it == filters.end()) return std::nullopt;
  return static_cast<std::size_t>(it - filters.begin());
}

std::vector<double> ExperimentResult::traces(FilterKind kind) const {
  const auto col = column_of(kind);
  if (!col) throw std::invalid_argument("filter not in experiment");
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& rec : records) out.push_back(rec.metrics[*col].trace);
  return out;
}

double ExperimentResult::mean_relerr(FilterKind kind, std::size_t window) const {
  const auto col = column_of(kind);
  if (!col || !column_of(FilterKind::kEnkf)) {
    throw std::invalid_argument("relative error needs the filter and EnKF");
  }
  window = std::min(window, records.size());
  double sum = 0.0;
  for (std::size_t i = records.size() - window; i < records.size(); ++i) {
    const auto& m = records[i].metrics[*col];
    sum += m.relerr.value_or(std::numeric_limits<double>::quiet_NaN());
  }
  return sum / static_cast<double>(window);
}

double ExperimentResult::mean_relative_gap(FilterKind a, FilterKind b, std::size_t window) const {
  const auto ta = traces(a);
  const auto tb = traces(b);
  window = std::min(window, records.size());
  double sum = 0.0;
  for (std::size_t i = records.size() - window; i < records.size(); ++i) {
    sum += std::abs(ta[i] - tb[i]) / tb[i];
  }
  return sum / static_cast<double>(window);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const ModelSetup setup = build_model(cfg);
  ExperimentResult result;
  result.filters = cfg.filters;
  std::sort(result.filters.begin(), result.filters.end());
  result.filters.erase(std::unique(result.filters.begin(), result.filters.end()),
                       result.filters.end());
  result.truth = simulate_truth(setup.model, setup.x0, cfg.horizon, cfg.seed);

  std::vector<FilterRun> runs;
  runs.reserve(result.filters.size());
  for (auto kind : result.filters) {
    runs.push_back(run_filter(kind, setup, result.truth, cfg));
    if (!runs.back().divergence.empty()) result.divergence.push_back(runs.back().divergence);
  }

  const auto enkf_col = result.column_of(FilterKind::kEnkf);
  result.records.resize(static_cast<std::size_t>(cfg.horizon));
  for (std::size_t i = 0; i < result.records.size(); ++i) {
    auto& rec = result.records[i];
    rec.step = static_cast<int>(i) + 1;
    for (auto& run : runs) rec.metrics.push_back(run.metrics[i]);
    if (enkf_col) {
      const double reference = rec.metrics[*enkf_col].trace;
      for (auto& m : rec.metrics) m.relerr = std::abs(m.trace - reference) / reference;
    }
  }
  return result;
}

std::string csv_header(const std::vector<FilterKind>& filters) {
  std::string header = "k";
  for (auto kind : filters) {
    const std::string name(filter_name(kind));
    header += ",trP_" + name + ",relerr_" + name + ",z_" + name + ",enorm_" + name;
  }
  return header;
}

void export_csv(const ExperimentResult& result, const std::filesystem::path& path) {
  if (result.filters.empty()) throw std::invalid_argument("export_csv: no filters selected");
  if (result.records.empty()) throw std::invalid_argument("export_csv: no records");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << csv_header(result.filters) << '\n';
  for (const auto& rec : result.records) {
    out << rec.step;
    for (const auto& m : rec.metrics) {
      out << ',' << format_double(m.trace) << ',';
      if (m.relerr) out << format_double(*m.relerr);
      out << ',' << format_double(m.output_error) << ',' << format_double(m.error_norm);
    }
    out << '\n';
  }
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV file " + path.string());
  for (auto field : split(line, ',')) table.header.emplace_back(field);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::optional<double>> row;
    for (auto field : split(line, ',')) {
      if (field.empty()) {
        row.emplace_back(std::nullopt);
      } else {
        row.emplace_back(std::strtod(std::string(field).c_str(), nullptr));
      }
    }
    if (row.size() != table.header.size()) {
      throw std::runtime_error("CSV row width does not match header in " + path.string());
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

ExperimentConfig example_config(int example) {
  ExperimentConfig cfg;
  cfg.seed = 1;
  switch (example) {
    case 1:
      cfg.model = "linear-ex1";
      cfg.horizon = 1;
      cfg.filters = {FilterKind::kEkf, FilterKind::kKf, FilterKind::kUkf, FilterKind::kEukfa,
                     FilterKind::kEukfc};
      break;
    case 2:
      cfg.model = "linear-ex2";
      cfg.horizon = 100;
      cfg.filters = {FilterKind::kKf, FilterKind::kUkf};
      break;
    case 3:
    case 4:
      cfg.model = example == 3 ? "vdp" : "lorenz";
      cfg.horizon = 5000;
      cfg.filters = {FilterKind::kEnkf, FilterKind::kEkf, FilterKind::kUkf, FilterKind::kEukfa,
                     FilterKind::kEukfc};
      break;
    default:
      throw std::invalid_argument("example must be 1, 2, 3 or 4");
  }
  return cfg;
}

Example1Summary example1_summary() {
  const LinearSystem sys = example1_system();
  const SystemModel model = sys.to_model();
  const StateEstimate est{Vector::Ones(2), SpdMatrix::identity(2), 0};
  const Vector u;
  const Vector y = Vector::Zero(1);  // covariances do not depend on y

  const auto [kf_est, kf_rec] = kf_step(sys, est, u, y);
  const auto [ukf_est, ukf_rec] = ukf_step(model, est, u, y, 1.5);
  const SpdMatrix true_cov =
      evaluate_gain_cov(kf_rec.prior_cov, kf_rec.innovation_cov, kf_rec.cross_cov, ukf_rec.gain);
  return {kf_est.cov.trace(), ukf_est.cov.trace(), true_cov.trace()};
}

}  // namespace kalman
