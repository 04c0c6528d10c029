#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sphreg/heads.hpp"
#include "sphreg/metrics.hpp"
#include "sphreg/network.hpp"

namespace sphreg {

/// Regression strategy of the prediction head.
///   Direct: raw O regressed onto the signed target (no sign branch).
///   Flat:   P = O/‖O‖ regressed onto |Y|, plus the sign branch.
///   Sexp:   P = spherical exponential of O regressed onto |Y|, plus the sign branch.
enum class HeadMode { Direct, Flat, Sexp };

std::string_view to_string(HeadMode head) noexcept;
HeadMode parse_head(std::string_view s);
SphereKind parse_task(std::string_view s);
RegressionLoss parse_loss(std::string_view s);
std::optional<ActivationKind> head_activation(HeadMode head) noexcept;

struct ExperimentConfig {
  SphereKind task = SphereKind::S3;
  HeadMode head = HeadMode::Sexp;
  RegressionLoss loss = RegressionLoss::Cosine;
  double lambda = kDefaultSignWeight;
  std::size_t epochs = 50;
  std::size_t batch = 64;
  double lr = 0.05;
  std::uint64_t seed = 0;
  std::size_t n_train = 8192;
  std::size_t n_test = 2048;
  double noise = 0.01;
  std::optional<double> pre_rotation;  // radians

  /// Throws DomainError on inconsistent settings: smoothl1 needs the direct
  /// head, xent2 needs sexp, direct takes smoothl1 or l2, pre-rotation is
  /// s1/s2 only, and all counts and rates must be positive.
  void validate() const;
};

/// JSON with the field names above; `pre_rotation` in radians or null.
std::string config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(std::string_view json, ExperimentConfig base = {});

/// 16 hex digits identifying a config (FNV-1a over its canonical JSON).
std::string config_hash(const ExperimentConfig& cfg);

struct GradVariance {
  double global = 0.0;     // variance of grad_O_norm over every record
  double per_epoch = 0.0;  // mean of the within-epoch variances
};
GradVariance grad_norm_variance(const std::vector<TrainRecord>& records);

struct ExperimentResult {
  ExperimentConfig config;
  EvalReport report;
  std::vector<TrainRecord> records;
  GradVariance grad_var;
  std::optional<std::string> failure;  // set when training diverged
  MlpModel model;
  std::vector<Vector> predictions;  // on-sphere predictions for the test split
  std::vector<Vector> targets;      // test targets
};

/// Generate data, train, evaluate on the held-out split. Deterministic in cfg.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Convert on-sphere vectors into per-sample angular errors for the task and
/// summarize them (s1: azimuth rotations, s2: normals, s3: quaternions).
EvalReport evaluate_task(SphereKind task, const std::vector<Vector>& preds,
                         const std::vector<Vector>& gts);

/// Floats as "%.9g".
std::string format_float(double v);

void write_records_csv(std::ostream& os, const std::vector<TrainRecord>& records);
std::vector<TrainRecord> read_records_csv(std::istream& is);

inline constexpr std::string_view kReportHeader =
    "task,head,loss,med_err_deg,acc_pi6,acc_pi12,acc_pi24,grad_var";

struct ReportRow {
  std::string task;
  std::string head;
  std::string loss;
  double med_err_deg = 0.0;
  double acc_pi6 = 0.0;
  double acc_pi12 = 0.0;
  double acc_pi24 = 0.0;
  double grad_var = 0.0;
};
ReportRow make_report_row(const ExperimentResult& result);
void write_report_csv(std::ostream& os, const std::vector<ReportRow>& rows);
std::vector<ReportRow> read_report_csv(std::istream& is);

/// Vectors one per line, space separated, "%.9g".
void write_vectors(std::ostream& os, const std::vector<Vector>& vs);
std::vector<Vector> read_vectors(std::istream& is, std::size_t dims);

/// Writes config.json, records.csv, report.csv, predictions.txt,
/// targets.txt and model.ckpt into `dir` (created if needed).
void write_run(const std::filesystem::path& dir, const ExperimentResult& result);

/// Run directory name for a config: "run-<hash>".
std::string run_dir_name(const ExperimentConfig& cfg);

struct RunSummary {
  ReportRow row;
  GradVariance grad_var;
  std::uint64_t seed = 0;
};
struct AggregateRow {
  std::string task, head, loss;
  std::size_t runs = 0;
  ReportRow mean;              // metric means across runs
  double grad_var_per_epoch = 0.0;
};

/// Load every run directory under `dir` (one level deep).
std::vector<RunSummary> load_runs(const std::filesystem::path& dir);
/// Group runs by (task, head, loss) and average.
std::vector<AggregateRow> aggregate_runs(const std::vector<RunSummary>& runs);

inline constexpr std::string_view kGradVarianceHeader =
    "task,head,loss,runs,grad_var_global,grad_var_per_epoch";
void write_comparison_csv(std::ostream& os, const std::vector<AggregateRow>& rows);
void write_grad_variance_csv(std::ostream& os, const std::vector<AggregateRow>& rows);

}  // namespace sphreg
