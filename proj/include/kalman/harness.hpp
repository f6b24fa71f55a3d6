#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kalman/numerics.hpp"
#include "kalman/statespace.hpp"

namespace kalman {

/// Filters in CSV column order.
enum class FilterKind { kEnkf, kEkf, kKf, kUkf, kEukfa, kEukfc };

std::string_view filter_name(FilterKind kind);
FilterKind parse_filter(std::string_view name);
/// Comma-separated list; result is deduplicated and sorted into column order.
std::vector<FilterKind> parse_filter_list(std::string_view list);

struct ExperimentConfig {
  std::string model = "lorenz";  // linear-ex1 | linear-ex2 | vdp | lorenz | custom
  int horizon = 5000;
  std::uint64_t seed = 1;
  double alpha = 1.5;
  Eigen::Index ensemble_size = 100000;
  std::vector<FilterKind> filters{FilterKind::kEnkf, FilterKind::kEkf, FilterKind::kUkf,
                                  FilterKind::kEukfa, FilterKind::kEukfc};
  int threads = 1;

  // Model overrides. Scalar noise levels mean q·I and r·I.
  std::optional<double> ts;
  std::optional<double> mu;
  std::optional<double> q;
  std::optional<double> r;
  std::optional<Vector> x0;
  std::optional<double> p0;

  // Only for model == "custom": a time-invariant linear system.
  std::optional<Matrix> custom_a;
  std::optional<Matrix> custom_c;

  /// Throws std::invalid_argument describing the first violated constraint.
  void validate() const;
};

/// Applies `key = value` lines (blank lines and `#` comments ignored).
void apply_config_text(ExperimentConfig& cfg, std::string_view text);
void load_config_file(ExperimentConfig& cfg, const std::filesystem::path& path);
/// Applies a single key/value pair; shared by the config file and the CLI.
void apply_config_value(ExperimentConfig& cfg, std::string_view key, std::string_view value);

/// Resolved model with its initial condition.
struct ModelSetup {
  SystemModel model;
  std::optional<LinearSystem> linear;
  Vector x0;
  SpdMatrix p0;
};

ModelSetup build_model(const ExperimentConfig& cfg);

LinearSystem example1_system();
LinearSystem example2_system();

struct Trajectory {
  std::vector<Vector> states;        // x_0..x_H
  std::vector<Vector> measurements;  // y_0..y_H
};

/// Samples x_{k+1} = f(x_k) + w_k and y_k = g(x_k) + v_k from dedicated
/// streams. Throws TruthDiverged with the step index on non-finite states.
Trajectory simulate_truth(const SystemModel& model, const Vector& x0, int horizon,
                          std::uint64_t seed);

struct FilterMetrics {
  double trace = 0.0;
  std::optional<double> relerr;  // only when EnKF ran
  double output_error = 0.0;     // y_k − g(x̂_{k|k}); Euclidean norm when l_y > 1
  double error_norm = 0.0;       // ‖x_k − x̂_{k|k}‖₂
  Matrix gain;
  bool diverged = false;
};

/// One row of the experiment: metrics for every selected filter at step k.
struct ExperimentRecord {
  int step = 0;
  std::vector<FilterMetrics> metrics;  // aligned with ExperimentResult::filters
};

struct ExperimentResult {
  std::vector<FilterKind> filters;
  std::vector<ExperimentRecord> records;  // steps 1..H
  Trajectory truth;
  std::vector<std::string> divergence;    // one message per diverged filter

  std::optional<std::size_t> column_of(FilterKind kind) const;
  /// Per-step posterior traces for one filter.
  std::vector<double> traces(FilterKind kind) const;
  /// Mean relative trace error versus EnKF over the last `window` steps.
  double mean_relerr(FilterKind kind, std::size_t window) const;
  /// Mean of |tr_a − tr_b| / tr_b over the last `window` steps.
  double mean_relative_gap(FilterKind a, FilterKind b, std::size_t window) const;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Header row then one row per step, 17 significant digits, LF endings.
void export_csv(const ExperimentResult& result, const std::filesystem::path& path);
std::string csv_header(const std::vector<FilterKind>& filters);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::optional<double>>> rows;  // empty fields are nullopt
};

CsvTable read_csv(const std::filesystem::path& path);

/// The configuration used to reproduce a numbered example (1..4).
ExperimentConfig example_config(int example);

struct Example1Summary {
  double kf_trace = 0.0;        // tr P_{1|1}
  double ukf_trace = 0.0;       // tr P^UKF_{1|1}
  double ukf_true_trace = 0.0;  // tr P(K^UKF_1)
};

Example1Summary example1_summary();

}  // namespace kalman
