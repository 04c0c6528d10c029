#include "sphreg/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "sphreg/activations.hpp"
#include "sphreg/heads.hpp"
#include "sphreg/network.hpp"

namespace sphreg {

namespace {

constexpr double kKinkMargin = 1e-3;
constexpr std::size_t kMaxRedraws = 1000;

std::size_t draw_dim(Rng& rng, std::size_t max_dim) {
  return 2 + rng.uniform_index(std::max<std::size_t>(max_dim, 2) - 1);
}

Vector random_unit_abs(Rng& rng, std::size_t n) {
  Vector v;
  do {
    v = rng.normal_vector(n);
  } while (!(v.norm() > 1e-3));
  v = l2_normalize(v);
  for (double& x : v) x = std::abs(x);
  return v;
}

Vector concat(const Vector& a, const Vector& b) {
  Vector out(a.size() + b.size());
  std::copy(a.begin(), a.end(), out.begin());
  std::copy(b.begin(), b.end(), out.begin() + static_cast<std::ptrdiff_t>(a.size()));
  return out;
}

Vector slice(const Vector& v, std::size_t begin, std::size_t n) {
  Vector out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = v[begin + i];
  return out;
}

// Runs `trial` `options.trials` times and keeps the worst relative error.
template <class Trial>
GradCheckResult run_check(std::string name, double tolerance, const GradCheckOptions& options,
                          std::uint64_t stream, Trial&& trial) {
  Rng rng = Rng(options.seed).fork(stream);
  GradCheckResult r{std::move(name), options.trials, 0.0, tolerance};
  for (std::size_t t = 0; t < options.trials; ++t) {
    const double e = trial(rng);
    // NaN must fail, so compare through the negation.
    if (!(e <= r.max_rel_error)) r.max_rel_error = e;
  }
  return r;
}

double check_activation(ActivationKind kind, Rng& rng, const GradCheckOptions& options) {
  const std::size_t n = draw_dim(rng, options.max_dim);
  Vector o;
  do {
    o = rng.normal_vector(n, rng.uniform(0.5, 2.0));
  } while (!(o.norm() > 0.1));
  return grad_check(kind, o, options.eps);
}

double check_scalar_loss(const std::function<LossValue(const Vector&)>& loss, const Vector& x,
                         double eps) {
  const Vector analytic = loss(x).grad_abs;
  const Vector numeric = fd_gradient([&](const Vector& v) { return loss(v).value; }, x, eps);
  return max_relative_error(analytic, numeric);
}

struct ModelCase {
  const char* name;
  std::optional<ActivationKind> activation;
  RegressionLoss loss;
};

const ModelCase kModelCases[] = {
    {"model/direct+smoothl1", std::nullopt, RegressionLoss::SmoothL1},
    {"model/direct+l2", std::nullopt, RegressionLoss::L2},
    {"model/flat+cosine", ActivationKind::SphericalFlat, RegressionLoss::Cosine},
    {"model/flat+l2", ActivationKind::SphericalFlat, RegressionLoss::L2},
    {"model/sexp+cosine", ActivationKind::SphericalExp, RegressionLoss::Cosine},
    {"model/sexp+l2", ActivationKind::SphericalExp, RegressionLoss::L2},
    {"model/sexp+xent2", ActivationKind::SphericalExp, RegressionLoss::XentSquares},
};

Vector random_target(Rng& rng, SphereKind kind) {
  Vector y;
  do {
    y = rng.normal_vector(sphere_dims(kind));
  } while (!(y.norm() > 1e-3));
  y = l2_normalize(y);
  if (kind == SphereKind::S2) y[2] = -std::abs(y[2]);
  if (kind == SphereKind::S3) y[0] = std::abs(y[0]);
  return y;
}

bool near_smooth_l1_kink(const Vector& out, const Vector& y) {
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (std::abs(std::abs(y[i] - out[i]) - 1.0) < kKinkMargin) return true;
  }
  return false;
}

double check_model(const ModelCase& c, std::size_t trial, Rng& rng, double eps) {
  static constexpr SphereKind kTasks[] = {SphereKind::S1, SphereKind::S2, SphereKind::S3};
  const SphereKind task = kTasks[trial % 3];
  const bool use_sign = c.activation.has_value();

  Architecture arch{4, {8, 8}, sphere_dims(task), sign_classes(task), c.activation};
  for (std::size_t attempt = 0; attempt < kMaxRedraws; ++attempt) {
    MlpModel model = MlpModel::create(arch, rng);
    // Nonzero biases so the check covers them with a generic value.
    for (auto& t : model.parameters()) {
      if (t.name.ends_with(".bias")) {
        for (double& b : t.values) b = rng.normal(0.0, 0.1);
      }
    }
    const Vector x = rng.normal_vector(arch.input_dim);
    const Vector y = random_target(rng, task);
    const SphereTarget target = encode_target(y, task);

    const ForwardResult fwd = model.forward(x);
    // Central differences straddling a kink measure the kink, not the gradient.
    if (model.relu_margin() < kKinkMargin) continue;
    if (c.loss == RegressionLoss::SmoothL1 && near_smooth_l1_kink(fwd.output, y)) continue;
    if (c.activation == ActivationKind::SphericalFlat && fwd.embedding.norm() < 0.05) continue;

    const SampleLoss sl = sample_loss(fwd, y, target, c.loss, use_sign, kDefaultSignWeight);
    const std::vector<double> analytic =
        MlpModel::flatten(model.backward(sl.grad_output, sl.grad_logits));

    std::vector<double*> params;
    for (auto& t : model.parameters()) {
      for (double& v : t.values) params.push_back(&v);
    }
    auto loss_at = [&]() {
      return sample_loss(model.forward(x), y, target, c.loss, use_sign, kDefaultSignWeight).value;
    };
    Vector a(params.size()), numeric(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double saved = *params[i];
      *params[i] = saved + eps;
      const double up = loss_at();
      *params[i] = saved - eps;
      const double down = loss_at();
      *params[i] = saved;
      numeric[i] = (up - down) / (2.0 * eps);
      a[i] = analytic[i];
    }
    return max_relative_error(a, numeric);
  }
  throw DomainError(std::string(c.name) + ": could not draw a point away from the kinks");
}

}  // namespace

std::vector<GradCheckResult> run_model_gradient_checks(const GradCheckOptions& options) {
  std::vector<GradCheckResult> out;
  std::uint64_t stream = 100;
  for (const auto& c : kModelCases) {
    std::size_t trial = 0;
    out.push_back(run_check(c.name, kModelGradCheckTolerance, options, stream++,
                            [&](Rng& rng) { return check_model(c, trial++, rng, options.eps); }));
  }
  return out;
}

std::vector<GradCheckResult> run_gradient_checks(const GradCheckOptions& options) {
  if (options.trials == 0) throw DomainError("gradcheck: trials must be at least 1");
  if (!(options.eps > 0.0)) throw DomainError("gradcheck: eps must be positive");
  if (options.max_dim < 2) throw DomainError("gradcheck: max_dim must be at least 2");
  const double eps = options.eps;
  std::vector<GradCheckResult> out;

  for (auto kind : {ActivationKind::Softmax, ActivationKind::SphericalFlat,
                    ActivationKind::SphericalExp}) {
    out.push_back(run_check("jacobian/" + std::string(to_string(kind)), kGradCheckTolerance,
                            options, 1 + static_cast<std::uint64_t>(kind),
                            [&](Rng& rng) { return check_activation(kind, rng, options); }));
  }

  out.push_back(run_check("loss/softmax_xent", kGradCheckTolerance, options, 10, [&](Rng& rng) {
    const std::size_t n = draw_dim(rng, options.max_dim);
    const Vector o = rng.normal_vector(n, 2.0);
    Vector y = random_unit_abs(rng, n);
    double s = 0.0;
    for (double& v : y) s += v;
    y *= 1.0 / s;
    auto f = [&](const Vector& v) {
      const Vector p = softmax_forward(v);
      double l = 0.0;
      for (std::size_t i = 0; i < n; ++i) l -= y[i] * std::log(p[i]);
      return l;
    };
    return max_relative_error(softmax_xent_grad(softmax_forward(o), y), fd_gradient(f, o, eps));
  }));

  out.push_back(run_check("loss/cosine", kGradCheckTolerance, options, 11, [&](Rng& rng) {
    const std::size_t n = draw_dim(rng, options.max_dim);
    const Vector y = random_unit_abs(rng, n);
    return check_scalar_loss([&](const Vector& p) { return cosine_proximity_loss(p, y); },
                             random_unit_abs(rng, n), eps);
  }));

  out.push_back(run_check("loss/l2", kGradCheckTolerance, options, 12, [&](Rng& rng) {
    const std::size_t n = draw_dim(rng, options.max_dim);
    const Vector y = random_unit_abs(rng, n);
    return check_scalar_loss([&](const Vector& p) { return l2_sphere_loss(p, y); },
                             random_unit_abs(rng, n), eps);
  }));

  out.push_back(run_check("loss/xent2", kGradCheckTolerance, options, 13, [&](Rng& rng) {
    const std::size_t n = draw_dim(rng, options.max_dim);
    const Vector y = random_unit_abs(rng, n);
    Vector p(n);
    for (double& v : p) v = rng.uniform(0.05, 1.0);
    return check_scalar_loss([&](const Vector& q) { return xent_squares_loss(q, y); }, p, eps);
  }));

  out.push_back(run_check("loss/smoothl1", kGradCheckTolerance, options, 14, [&](Rng& rng) {
    const std::size_t n = draw_dim(rng, options.max_dim);
    Vector o, y;
    do {
      o = rng.normal_vector(n, 1.5);
      y = rng.normal_vector(n);
    } while (near_smooth_l1_kink(o, y));
    return check_scalar_loss([&](const Vector& v) { return smooth_l1_loss(v, y); }, o, eps);
  }));

  out.push_back(run_check("loss/sign_xent", kGradCheckTolerance, options, 15, [&](Rng& rng) {
    const std::size_t n = draw_dim(rng, options.max_dim);
    const Vector z = rng.normal_vector(n, 2.0);
    const int cls = static_cast<int>(rng.uniform_index(n));
    const Vector analytic = sign_xent_loss(z, cls).grad_logits;
    const Vector numeric =
        fd_gradient([&](const Vector& v) { return sign_xent_loss(v, cls).value; }, z, eps);
    return max_relative_error(analytic, numeric);
  }));

  out.push_back(run_check("loss/joint", kGradCheckTolerance, options, 16, [&](Rng& rng) {
    const std::size_t n = draw_dim(rng, options.max_dim);
    const std::size_t k = draw_dim(rng, 8);
    const Vector y = random_unit_abs(rng, n);
    const int cls = static_cast<int>(rng.uniform_index(k));
    const double w = rng.uniform(0.1, 2.0);
    const Vector x = concat(random_unit_abs(rng, n), rng.normal_vector(k, 2.0));
    auto eval = [&](const Vector& v) { return joint_loss(slice(v, 0, n), y, slice(v, n, k), cls, w); };
    const LossValue lv = eval(x);
    const Vector numeric = fd_gradient([&](const Vector& v) { return eval(v).value; }, x, eps);
    return max_relative_error(concat(lv.grad_abs, lv.grad_logits), numeric);
  }));

  for (auto& r : run_model_gradient_checks(options)) out.push_back(std::move(r));
  return out;
}

}  // namespace sphreg
