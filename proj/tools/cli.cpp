#include "sphreg_cli/cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "sphreg/experiment.hpp"
#include "sphreg/gradcheck.hpp"
#include "sphreg/rotations.hpp"

namespace sphreg::cli {

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitDiverged = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct GradcheckArgs {
  std::size_t trials = 1000;
  double eps = kDefaultFdEps;
  std::optional<std::uint64_t> seed;
};

int cmd_gradcheck(const GradcheckArgs& a, std::ostream& out) {
  GradCheckOptions opts;
  opts.trials = a.trials;
  opts.eps = a.eps;
  if (a.seed) opts.seed = *a.seed;
  const auto start = std::chrono::steady_clock::now();
  const auto results = run_gradient_checks(opts);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  bool ok = true;
  for (const auto& r : results) {
    ok = ok && r.passed();
    out << (r.passed() ? "PASS " : "FAIL ") << r.name << " trials=" << r.trials
        << " max_rel_err=" << format_float(r.max_rel_error)
        << " tol=" << format_float(r.tolerance) << '\n';
  }
  out << (ok ? "all gradient checks passed" : "gradient checks FAILED") << " ("
      << format_float(secs) << " s)\n";
  return ok ? 0 : kExitFailure;
}

struct SampleArgs {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_sample(const SampleArgs& a, std::ostream& out) {
  Rng rng(a.seed);
  const auto qs = sample_uniform_so3(rng, a.n);
  if (a.out.empty()) {
    write_quaternions(out, qs);
    return 0;
  }
  std::ofstream os(a.out, std::ios::binary);
  if (!os) throw Error("cannot write " + a.out);
  write_quaternions(os, qs);
  return 0;
}

struct TrainArgs {
  std::string config;
  std::string out;
  std::string task, head, loss;
  double lambda = 0, lr = 0, pre_rot_deg = 0;
  std::size_t epochs = 0, batch = 0, n_train = 0, n_test = 0;
  std::uint64_t seed = 0;
  double noise = 0;
};

int cmd_train(const TrainArgs& a, const CLI::App& sub, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg;
  if (!a.config.empty()) cfg = config_from_json(read_file(a.config), cfg);
  auto given = [&sub](const char* name) { return sub.count(name) > 0; };
  if (given("--task")) cfg.task = parse_task(a.task);
  if (given("--head")) cfg.head = parse_head(a.head);
  if (given("--loss")) cfg.loss = parse_loss(a.loss);
  if (given("--lambda")) cfg.lambda = a.lambda;
  if (given("--epochs")) cfg.epochs = a.epochs;
  if (given("--batch")) cfg.batch = a.batch;
  if (given("--lr")) cfg.lr = a.lr;
  if (given("--seed")) cfg.seed = a.seed;
  if (given("--n-train")) cfg.n_train = a.n_train;
  if (given("--n-test")) cfg.n_test = a.n_test;
  if (given("--noise")) cfg.noise = a.noise;
  if (given("--pre-rot")) cfg.pre_rotation = a.pre_rot_deg * std::numbers::pi / 180.0;
  cfg.validate();

  const ExperimentResult result = run_experiment(cfg);
  const std::filesystem::path dir = std::filesystem::path(a.out) / run_dir_name(cfg);
  write_run(dir, result);
  out << dir.string() << '\n';
  write_report_csv(out, {make_report_row(result)});
  if (result.failure) {
    err << "training diverged: " << *result.failure << '\n';
    return kExitDiverged;
  }
  return 0;
}

struct EvalArgs {
  std::string pred, gt, task;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const SphereKind task = parse_task(a.task);
  std::ifstream pin(a.pred), gin(a.gt);
  if (!pin) throw Error("cannot open " + a.pred);
  if (!gin) throw Error("cannot open " + a.gt);
  const auto preds = read_vectors(pin, sphere_dims(task));
  const auto gts = read_vectors(gin, sphere_dims(task));
  const EvalReport r = evaluate_task(task, preds, gts);
  out << "count " << r.count << '\n'
      << "med_err " << format_float(r.med_err) << '\n'
      << "mean_err " << format_float(r.mean_err) << '\n'
      << "acc_pi6 " << format_float(r.acc_pi6) << '\n'
      << "acc_pi12 " << format_float(r.acc_pi12) << '\n'
      << "acc_pi24 " << format_float(r.acc_pi24) << '\n'
      << "acc_11_25 " << format_float(r.acc_11_25) << '\n'
      << "acc_22_5 " << format_float(r.acc_22_5) << '\n'
      << "acc_30 " << format_float(r.acc_30) << '\n';
  return 0;
}

int cmd_report(const std::string& dir, std::ostream& out) {
  const auto rows = aggregate_runs(load_runs(dir));
  if (rows.empty()) throw DomainError("report: no runs under " + dir);
  const std::filesystem::path base(dir);
  {
    std::ofstream os(base / "comparison.csv", std::ios::binary);
    if (!os) throw Error("cannot write comparison.csv");
    write_comparison_csv(os, rows);
  }
  {
    std::ofstream os(base / "grad_variance.csv", std::ios::binary);
    if (!os) throw Error("cannot write grad_variance.csv");
    write_grad_variance_csv(os, rows);
  }
  out << "# comparison\n";
  write_comparison_csv(out, rows);
  out << "# gradient variance\n";
  write_grad_variance_csv(out, rows);
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spherical regression toolkit"};
  app.require_subcommand(1);

  GradcheckArgs gc;
  auto* gradcheck = app.add_subcommand("gradcheck", "Analytic vs finite-difference gradient checks");
  gradcheck->add_option("--trials", gc.trials, "Random draws per check")->check(CLI::PositiveNumber);
  gradcheck->add_option("--eps", gc.eps, "Finite-difference step")->check(CLI::PositiveNumber);
  gradcheck->add_option("--seed", gc.seed, "Seed for the random draws");

  SampleArgs sa;
  auto* sample = app.add_subcommand("sample-so3", "Haar-uniform rotations as quaternion lines");
  sample->add_option("--n", sa.n, "Number of samples")->required()->check(CLI::PositiveNumber);
  sample->add_option("--seed", sa.seed, "RNG seed")->required();
  sample->add_option("--out", sa.out, "Output file (default stdout)");

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "Train and evaluate one configuration");
  train_cmd->add_option("--config", ta.config, "JSON config; flags override")->check(CLI::ExistingFile);
  train_cmd->add_option("--out", ta.out, "Output directory")->required();
  train_cmd->add_option("--task", ta.task)->check(CLI::IsMember({"s1", "s2", "s3"}));
  train_cmd->add_option("--head", ta.head)->check(CLI::IsMember({"direct", "flat", "sexp"}));
  train_cmd->add_option("--loss", ta.loss)
      ->check(CLI::IsMember({"cosine", "l2", "xent2", "smoothl1"}));
  train_cmd->add_option("--lambda", ta.lambda, "Sign-branch weight");
  train_cmd->add_option("--epochs", ta.epochs);
  train_cmd->add_option("--batch", ta.batch);
  train_cmd->add_option("--lr", ta.lr);
  train_cmd->add_option("--seed", ta.seed);
  train_cmd->add_option("--n-train", ta.n_train);
  train_cmd->add_option("--n-test", ta.n_test);
  train_cmd->add_option("--noise", ta.noise, "Feature noise sigma");
  train_cmd->add_option("--pre-rot", ta.pre_rot_deg, "Target pre-rotation in degrees (s1, s2)");

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Angular error report for prediction/target files");
  eval->add_option("--pred", ea.pred)->required()->check(CLI::ExistingFile);
  eval->add_option("--gt", ea.gt)->required()->check(CLI::ExistingFile);
  eval->add_option("--task", ea.task)->required()->check(CLI::IsMember({"s1", "s2", "s3"}));

  std::string report_dir;
  auto* report = app.add_subcommand("report", "Aggregate run directories");
  report->add_option("--dir", report_dir)->required()->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*gradcheck) return cmd_gradcheck(gc, out);
    if (*sample) return cmd_sample(sa, out);
    if (*train_cmd) return cmd_train(ta, *train_cmd, out, err);
    if (*eval) return cmd_eval(ea, out);
    if (*report) return cmd_report(report_dir, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace sphreg::cli
