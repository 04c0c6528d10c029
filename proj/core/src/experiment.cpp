#include "sphreg/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "sphreg/datasets.hpp"
#include "sphreg/rotations.hpp"

namespace sphreg {

namespace {

using json = nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  // strtod accepts "nan"/"inf", which report rows use for diverged runs.
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) throw DomainError("csv: not a number: '" + s + "'");
  return v;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

int head_order(const std::string& head) {
  if (head == "direct") return 0;
  if (head == "flat") return 1;
  if (head == "sexp") return 2;
  return 3;
}

double population_variance(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(xs.size());
}

}  // namespace

// ---------------------------------------------------------------- enums

std::string_view to_string(HeadMode head) noexcept {
  switch (head) {
    case HeadMode::Direct:
      return "direct";
    case HeadMode::Flat:
      return "flat";
    case HeadMode::Sexp:
      return "sexp";
  }
  return "unknown";
}

HeadMode parse_head(std::string_view s) {
  if (s == "direct") return HeadMode::Direct;
  if (s == "flat") return HeadMode::Flat;
  if (s == "sexp") return HeadMode::Sexp;
  throw DomainError("unknown head '" + std::string(s) + "'");
}

SphereKind parse_task(std::string_view s) {
  if (s == "s1") return SphereKind::S1;
  if (s == "s2") return SphereKind::S2;
  if (s == "s3") return SphereKind::S3;
  throw DomainError("unknown task '" + std::string(s) + "'");
}

RegressionLoss parse_loss(std::string_view s) {
  if (s == "cosine") return RegressionLoss::Cosine;
  if (s == "l2") return RegressionLoss::L2;
  if (s == "xent2") return RegressionLoss::XentSquares;
  if (s == "smoothl1") return RegressionLoss::SmoothL1;
  throw DomainError("unknown loss '" + std::string(s) + "'");
}

std::optional<ActivationKind> head_activation(HeadMode head) noexcept {
  switch (head) {
    case HeadMode::Direct:
      return std::nullopt;
    case HeadMode::Flat:
      return ActivationKind::SphericalFlat;
    case HeadMode::Sexp:
      return ActivationKind::SphericalExp;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------- config

void ExperimentConfig::validate() const {
  if (loss == RegressionLoss::SmoothL1 && head != HeadMode::Direct) {
    throw DomainError("config: smoothl1 loss requires head=direct");
  }
  if (loss == RegressionLoss::XentSquares && head != HeadMode::Sexp) {
    throw DomainError("config: xent2 loss requires head=sexp");
  }
  if (head == HeadMode::Direct && loss != RegressionLoss::SmoothL1 && loss != RegressionLoss::L2) {
    throw DomainError("config: head=direct takes smoothl1 or l2");
  }
  if (pre_rotation && task == SphereKind::S3) {
    throw DomainError("config: pre-rotation is only defined for s1 and s2");
  }
  if (pre_rotation && !std::isfinite(*pre_rotation)) throw DomainError("config: bad pre-rotation");
  if (epochs == 0 || batch == 0) throw DomainError("config: epochs and batch must be at least 1");
  if (n_train == 0 || n_test == 0) throw DomainError("config: n_train and n_test must be at least 1");
  if (!(lr > 0.0)) throw DomainError("config: lr must be positive");
  if (!(lambda >= 0.0)) throw DomainError("config: lambda must be non-negative");
  if (!(noise >= 0.0)) throw DomainError("config: noise must be non-negative");
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["task"] = std::string(to_string(cfg.task));
  j["head"] = std::string(to_string(cfg.head));
  j["loss"] = std::string(to_string(cfg.loss));
  j["lambda"] = cfg.lambda;
  j["epochs"] = cfg.epochs;
  j["batch"] = cfg.batch;
  j["lr"] = cfg.lr;
  j["seed"] = cfg.seed;
  j["n_train"] = cfg.n_train;
  j["n_test"] = cfg.n_test;
  j["noise"] = cfg.noise;
  j["pre_rotation"] = cfg.pre_rotation ? json(*cfg.pre_rotation) : json(nullptr);
  return j.dump(2);
}

ExperimentConfig config_from_json(std::string_view text, ExperimentConfig cfg) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DomainError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw DomainError("config: expected a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "task") cfg.task = parse_task(value.get<std::string>());
      else if (key == "head") cfg.head = parse_head(value.get<std::string>());
      else if (key == "loss") cfg.loss = parse_loss(value.get<std::string>());
      else if (key == "lambda") cfg.lambda = value.get<double>();
      else if (key == "epochs") cfg.epochs = value.get<std::size_t>();
      else if (key == "batch") cfg.batch = value.get<std::size_t>();
      else if (key == "lr") cfg.lr = value.get<double>();
      else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
      else if (key == "n_train") cfg.n_train = value.get<std::size_t>();
      else if (key == "n_test") cfg.n_test = value.get<std::size_t>();
      else if (key == "noise") cfg.noise = value.get<double>();
      else if (key == "pre_rotation") {
        cfg.pre_rotation = value.is_null() ? std::nullopt : std::optional(value.get<double>());
      } else {
        throw DomainError("config: unknown field '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw DomainError(std::string("config: bad field type: ") + e.what());
  }
  return cfg;
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config_to_json(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string run_dir_name(const ExperimentConfig& cfg) { return "run-" + config_hash(cfg); }

// ---------------------------------------------------------------- running

GradVariance grad_norm_variance(const std::vector<TrainRecord>& records) {
  GradVariance v;
  if (records.empty()) return v;
  std::vector<double> all;
  std::map<std::size_t, std::vector<double>> by_epoch;
  all.reserve(records.size());
  for (const auto& r : records) {
    all.push_back(r.grad_O_norm);
    by_epoch[r.epoch].push_back(r.grad_O_norm);
  }
  v.global = population_variance(all);
  double sum = 0.0;
  for (const auto& [epoch, xs] : by_epoch) sum += population_variance(xs);
  v.per_epoch = sum / static_cast<double>(by_epoch.size());
  return v;
}

EvalReport evaluate_task(SphereKind task, const std::vector<Vector>& preds,
                         const std::vector<Vector>& gts) {
  if (preds.size() != gts.size()) throw DimensionError("evaluate_task: length mismatch");
  switch (task) {
    case SphereKind::S1: {
      std::vector<EulerAngles> p, g;
      for (const auto& v : preds) p.push_back({std::atan2(v[1], v[0]), 0.0, 0.0});
      for (const auto& v : gts) g.push_back({std::atan2(v[1], v[0]), 0.0, 0.0});
      return eval_rotation(p, g);
    }
    case SphereKind::S2: {
      std::vector<Vector> p, g;
      for (const auto& v : preds) p.push_back(l2_normalize(v));
      for (const auto& v : gts) g.push_back(l2_normalize(v));
      return eval_normals(p, g);
    }
    case SphereKind::S3: {
      std::vector<Quaternion> p, g;
      for (const auto& v : preds) p.push_back(Quaternion::from_vector(l2_normalize(v)));
      for (const auto& v : gts) g.push_back(Quaternion::from_vector(l2_normalize(v)));
      return eval_rotation(p, g);
    }
  }
  throw DomainError("evaluate_task: unknown task");
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult result;
  result.config = cfg;

  const Rng root(cfg.seed);
  Rng train_rng = root.fork(1);
  Rng test_rng = root.fork(2);
  Rng init_rng = root.fork(3);

  SyntheticDataset train_set = generate(cfg.task, train_rng, cfg.n_train, cfg.noise);
  const SyntheticDataset test_set = generate(cfg.task, test_rng, cfg.n_test, cfg.noise);
  if (cfg.pre_rotation) train_set = apply_pre_rotation(train_set, *cfg.pre_rotation);

  const Architecture arch =
      default_architecture(train_set.features.front().size(), cfg.task, head_activation(cfg.head));
  MlpModel model = MlpModel::create(arch, init_rng);

  TrainConfig tc;
  tc.epochs = cfg.epochs;
  tc.batch_size = cfg.batch;
  tc.learning_rate = cfg.lr;
  tc.seed = root.fork(4).seed();
  tc.loss = cfg.loss;
  tc.sign_weight = cfg.lambda;

  try {
    TrainResult trained = train(std::move(model), train_set, tc);
    result.model = std::move(trained.model);
    result.records = std::move(trained.records);
  } catch (const TrainingDiverged& e) {
    result.failure = e.what();
    result.report.med_err = result.report.median_err = result.report.mean_err = kNaN;
    result.report.acc_pi6 = result.report.acc_pi12 = result.report.acc_pi24 = kNaN;
    result.report.acc_11_25 = result.report.acc_22_5 = result.report.acc_30 = kNaN;
    result.grad_var = {kNaN, kNaN};
    return result;
  }
  result.grad_var = grad_norm_variance(result.records);

  const bool use_sign = arch.activation.has_value();
  result.predictions.reserve(test_set.size());
  for (std::size_t i = 0; i < test_set.size(); ++i) {
    const ForwardResult fwd = result.model.forward(test_set.features[i]);
    Vector pred = predict_target(fwd, cfg.task, use_sign);
    if (cfg.pre_rotation) pred = rotate_target(pred, cfg.task, -*cfg.pre_rotation);
    result.predictions.push_back(std::move(pred));
  }
  result.targets = test_set.raw_targets;
  result.report = evaluate_task(cfg.task, result.predictions, result.targets);
  return result;
}

// ---------------------------------------------------------------- serialization

std::string format_float(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void write_records_csv(std::ostream& os, const std::vector<TrainRecord>& records) {
  os << "epoch,batch,loss,grad_O_norm\n";
  for (const auto& r : records) {
    os << r.epoch << ',' << r.batch << ',' << format_float(r.loss) << ','
       << format_float(r.grad_O_norm) << '\n';
  }
}

std::vector<TrainRecord> read_records_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || strip_cr(line) != "epoch,batch,loss,grad_O_norm") {
    throw DomainError("records.csv: bad header");
  }
  std::vector<TrainRecord> out;
  while (std::getline(is, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 4) throw DomainError("records.csv: expected 4 fields");
    out.push_back({static_cast<std::size_t>(std::stoull(f[0])),
                   static_cast<std::size_t>(std::stoull(f[1])), parse_double(f[2]),
                   parse_double(f[3])});
  }
  return out;
}

ReportRow make_report_row(const ExperimentResult& result) {
  ReportRow row;
  row.task = std::string(to_string(result.config.task));
  row.head = std::string(to_string(result.config.head));
  row.loss = std::string(to_string(result.config.loss));
  row.med_err_deg = result.report.med_err;
  row.acc_pi6 = result.report.acc_pi6;
  row.acc_pi12 = result.report.acc_pi12;
  row.acc_pi24 = result.report.acc_pi24;
  row.grad_var = result.grad_var.global;
  return row;
}

void write_report_csv(std::ostream& os, const std::vector<ReportRow>& rows) {
  os << kReportHeader << '\n';
  for (const auto& r : rows) {
    os << r.task << ',' << r.head << ',' << r.loss << ',' << format_float(r.med_err_deg) << ','
       << format_float(r.acc_pi6) << ',' << format_float(r.acc_pi12) << ','
       << format_float(r.acc_pi24) << ',' << format_float(r.grad_var) << '\n';
  }
}

std::vector<ReportRow> read_report_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || strip_cr(line) != kReportHeader) {
    throw DomainError("report.csv: bad header");
  }
  std::vector<ReportRow> out;
  while (std::getline(is, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 8) throw DomainError("report.csv: expected 8 fields");
    out.push_back({f[0], f[1], f[2], parse_double(f[3]), parse_double(f[4]), parse_double(f[5]),
                   parse_double(f[6]), parse_double(f[7])});
  }
  return out;
}

void write_vectors(std::ostream& os, const std::vector<Vector>& vs) {
  for (const auto& v : vs) {
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << format_float(v[i]);
    os << '\n';
  }
}

std::vector<Vector> read_vectors(std::istream& is, std::size_t dims) {
  std::vector<Vector> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    Vector v(dims);
    for (std::size_t i = 0; i < dims; ++i) {
      if (!(ls >> v[i])) {
        throw DomainError("line " + std::to_string(lineno) + ": expected " +
                          std::to_string(dims) + " values");
      }
    }
    double extra;
    if (ls >> extra) {
      throw DomainError("line " + std::to_string(lineno) + ": too many values");
    }
    out.push_back(std::move(v));
  }
  return out;
}

void write_run(const std::filesystem::path& dir, const ExperimentResult& result) {
  std::filesystem::create_directories(dir);
  auto open = [&dir](const char* name) {
    std::ofstream os(dir / name, std::ios::binary);
    if (!os) throw Error("cannot write " + (dir / name).string());
    return os;
  };
  {
    auto os = open("config.json");
    os << config_to_json(result.config) << '\n';
  }
  {
    auto os = open("records.csv");
    write_records_csv(os, result.records);
  }
  {
    auto os = open("report.csv");
    write_report_csv(os, {make_report_row(result)});
  }
  if (result.failure) {
    auto os = open("failure.txt");
    os << *result.failure << '\n';
    return;
  }
  {
    auto os = open("predictions.txt");
    write_vectors(os, result.predictions);
  }
  {
    auto os = open("targets.txt");
    write_vectors(os, result.targets);
  }
  {
    auto os = open("model.ckpt");
    save_checkpoint(os, result.model);
  }
}

// ---------------------------------------------------------------- aggregation

std::vector<RunSummary> load_runs(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw DomainError("report: not a directory: " + dir.string());
  std::vector<fs::path> run_dirs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory() && fs::exists(entry.path() / "report.csv")) {
      run_dirs.push_back(entry.path());
    }
  }
  std::sort(run_dirs.begin(), run_dirs.end());
  std::vector<RunSummary> runs;
  for (const auto& p : run_dirs) {
    std::ifstream report_in(p / "report.csv");
    const auto rows = read_report_csv(report_in);
    if (rows.size() != 1) throw DomainError("report: expected one row in " + p.string());
    RunSummary s;
    s.row = rows.front();
    std::ifstream records_in(p / "records.csv");
    if (records_in) s.grad_var = grad_norm_variance(read_records_csv(records_in));
    std::ifstream config_in(p / "config.json");
    if (config_in) {
      std::stringstream ss;
      ss << config_in.rdbuf();
      s.seed = config_from_json(ss.str()).seed;
    }
    runs.push_back(std::move(s));
  }
  return runs;
}

std::vector<AggregateRow> aggregate_runs(const std::vector<RunSummary>& runs) {
  using Key = std::tuple<std::string, int, std::string, std::string>;
  std::map<Key, AggregateRow> groups;
  for (const auto& r : runs) {
    const Key key{r.row.task, head_order(r.row.head), r.row.head, r.row.loss};
    auto& g = groups[key];
    g.task = r.row.task;
    g.head = r.row.head;
    g.loss = r.row.loss;
    g.mean.task = r.row.task;
    g.mean.head = r.row.head;
    g.mean.loss = r.row.loss;
    g.runs += 1;
    g.mean.med_err_deg += r.row.med_err_deg;
    g.mean.acc_pi6 += r.row.acc_pi6;
    g.mean.acc_pi12 += r.row.acc_pi12;
    g.mean.acc_pi24 += r.row.acc_pi24;
    g.mean.grad_var += r.row.grad_var;
    g.grad_var_per_epoch += r.grad_var.per_epoch;
  }
  std::vector<AggregateRow> out;
  for (auto& [key, g] : groups) {
    const double n = static_cast<double>(g.runs);
    g.mean.med_err_deg /= n;
    g.mean.acc_pi6 /= n;
    g.mean.acc_pi12 /= n;
    g.mean.acc_pi24 /= n;
    g.mean.grad_var /= n;
    g.grad_var_per_epoch /= n;
    out.push_back(g);
  }
  return out;
}

void write_comparison_csv(std::ostream& os, const std::vector<AggregateRow>& rows) {
  std::vector<ReportRow> means;
  means.reserve(rows.size());
  for (const auto& r : rows) means.push_back(r.mean);
  write_report_csv(os, means);
}

void write_grad_variance_csv(std::ostream& os, const std::vector<AggregateRow>& rows) {
  os << kGradVarianceHeader << '\n';
  for (const auto& r : rows) {
    os << r.task << ',' << r.head << ',' << r.loss << ',' << r.runs << ','
       << format_float(r.mean.grad_var) << ',' << format_float(r.grad_var_per_epoch) << '\n';
  }
}

}  // namespace sphreg
