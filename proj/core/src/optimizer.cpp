#include "mddest/optimizer.hpp"

#include "mddest/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mddest {

namespace {

constexpr double kArmijoC = 1e-4;
constexpr double kShrink = 0.5;
constexpr int kMaxBacktracks = 60;

Eigen::VectorXd clamp_to_bounds(Eigen::VectorXd x, const std::optional<Bounds>& bounds) {
  if (bounds) {
    x = x.cwiseMax(bounds->lower).cwiseMin(bounds->upper);
  }
  return x;
}

}  // namespace

MinimizeResult minimize_bfgs(const ValueFn& value, const ValueGradFn& value_grad,
                             Eigen::VectorXd x0, const OptimizerConfig& config) {
  const int d = static_cast<int>(x0.size());
  MinimizeResult res;
  res.x = clamp_to_bounds(std::move(x0), config.bounds);

  auto [f, g] = value_grad(res.x);
  Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(d, d);
  bool first_update = true;

  // Trial steps are capped in length: on numerically flat stretches (a
  // saturating link function, say) the inverse-Hessian estimate explodes
  // and an uncapped step would teleport the iterate arbitrarily far out.
  const double max_step = 10.0 * std::max(1.0, res.x.norm());

  res.value = f;
  res.grad_norm = g.norm();
  res.trace.push_back(f);

  for (int iter = 0; iter < config.max_iter; ++iter) {
    if (g.norm() < config.grad_tol) {
      res.converged = true;
      break;
    }
    Eigen::VectorXd direction = -(hinv * g);
    double slope = direction.dot(g);
    if (!(slope < 0.0)) {
      // curvature information went stale; restart from steepest descent
      hinv.setIdentity();
      first_update = true;
      direction = -g;
      slope = direction.dot(g);
    }

    double step = std::min(1.0, max_step / direction.norm());
    Eigen::VectorXd x_new;
    double f_new = std::numeric_limits<double>::quiet_NaN();
    bool accepted = false;
    for (int bt = 0; bt < kMaxBacktracks; ++bt) {
      x_new = clamp_to_bounds(res.x + step * direction, config.bounds);
      f_new = value(x_new);
      if (std::isfinite(f_new) && f_new <= res.value + kArmijoC * step * slope) {
        accepted = true;
        break;
      }
      step *= kShrink;
    }
    if (!accepted) {
      break;  // line search exhausted; report the best point found
    }

    auto [f_next, g_next] = value_grad(x_new);
    Eigen::VectorXd s = x_new - res.x;
    Eigen::VectorXd y = g_next - g;
    double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (first_update) {
        hinv *= sy / y.squaredNorm();
        first_update = false;
      }
      Eigen::VectorXd hy = hinv * y;
      double yhy = y.dot(hy);
      hinv += ((sy + yhy) / (sy * sy)) * (s * s.transpose()) -
              (hy * s.transpose() + s * hy.transpose()) / sy;
    }

    res.x = x_new;
    res.value = f_next;
    g = g_next;
    res.grad_norm = g.norm();
    res.iterations = iter + 1;
    res.trace.push_back(res.value);
  }
  if (!res.converged) {
    res.converged = res.grad_norm < config.grad_tol;
  }
  return res;
}

MinimizeResult minimize_nelder_mead(const ValueFn& value, Eigen::VectorXd x0,
                                    const OptimizerConfig& config) {
  const int d = static_cast<int>(x0.size());
  x0 = clamp_to_bounds(std::move(x0), config.bounds);

  std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(d) + 1, x0);
  for (int i = 0; i < d; ++i) {
    double step = std::abs(x0[i]) > 1e-8 ? 0.05 * x0[i] : 0.1;
    pts[static_cast<std::size_t>(i) + 1][i] += step;
    pts[static_cast<std::size_t>(i) + 1] =
        clamp_to_bounds(pts[static_cast<std::size_t>(i) + 1], config.bounds);
  }
  std::vector<double> fv(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) fv[i] = value(pts[i]);

  MinimizeResult res;
  const int max_iter = std::max(200, 60 * config.max_iter);
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    std::vector<std::size_t> order(pts.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    std::size_t best = order.front(), worst = order.back(), second = order[order.size() - 2];

    if (std::abs(fv[worst] - fv[best]) <=
        1e-13 * (std::abs(fv[best]) + std::abs(fv[worst])) + 1e-15) {
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
    for (std::size_t i : order) {
      if (i != worst) centroid += pts[i];
    }
    centroid /= static_cast<double>(d);

    auto eval_at = [&](double coef) {
      Eigen::VectorXd p = clamp_to_bounds(centroid + coef * (centroid - pts[worst]), config.bounds);
      return std::make_pair(p, value(p));
    };

    auto [xr, fr] = eval_at(1.0);  // reflection
    if (fr < fv[best]) {
      auto [xe, fe] = eval_at(2.0);  // expansion
      if (fe < fr) {
        pts[worst] = xe;
        fv[worst] = fe;
      } else {
        pts[worst] = xr;
        fv[worst] = fr;
      }
    } else if (fr < fv[second]) {
      pts[worst] = xr;
      fv[worst] = fr;
    } else {
      auto [xc, fc] = eval_at(fr < fv[worst] ? 0.5 : -0.5);  // contraction
      if (fc < std::min(fr, fv[worst])) {
        pts[worst] = xc;
        fv[worst] = fc;
      } else {
        for (std::size_t i : order) {  // shrink toward the best vertex
          if (i == best) continue;
          pts[i] = clamp_to_bounds(pts[best] + 0.5 * (pts[i] - pts[best]), config.bounds);
          fv[i] = value(pts[i]);
        }
      }
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (fv[i] < fv[best]) best = i;
  }
  res.x = pts[best];
  res.value = fv[best];
  res.iterations = iter;
  res.grad_norm = std::numeric_limits<double>::quiet_NaN();
  res.converged = false;  // caller decides using the gradient when available
  res.trace.push_back(res.value);
  return res;
}

std::vector<Eigen::VectorXd> multistart_points(const Eigen::VectorXd& base,
                                               const std::optional<Eigen::VectorXd>& warm,
                                               const OptimizerConfig& config) {
  std::vector<Eigen::VectorXd> starts;
  const int want = std::max(1, config.multistart);
  if (warm) starts.push_back(*warm);
  if (static_cast<int>(starts.size()) < want) starts.push_back(base);
  Rng rng(config.seed, derive_stream(0x737461727473ULL));
  while (static_cast<int>(starts.size()) < want) {
    starts.push_back(base + config.perturbation_scale *
                                rng.normal_vector(static_cast<int>(base.size())));
  }
  return starts;
}

MinimizeResult minimize_multistart(const ValueFn& value, const ValueGradFn& value_grad,
                                   const std::vector<Eigen::VectorXd>& starts,
                                   const OptimizerConfig& config) {
  if (starts.empty()) throw std::invalid_argument("minimize_multistart: no start points");
  MinimizeResult best;
  bool have_best = false;
  int total_iter = 0;
  for (const auto& start : starts) {
    MinimizeResult run;
    if (config.method == OptMethod::NelderMeadFallback) {
      run = minimize_nelder_mead(value, start, config);
      auto [f, g] = value_grad(run.x);
      run.value = f;
      run.grad_norm = g.norm();
      run.converged = run.grad_norm < config.grad_tol;
    } else {
      run = minimize_bfgs(value, value_grad, start, config);
      if (!run.converged) {
        // polish a stalled quasi-Newton run with the simplex fallback
        MinimizeResult polish = minimize_nelder_mead(value, run.x, config);
        if (polish.value < run.value) {
          auto [f, g] = value_grad(polish.x);
          polish.value = f;
          polish.grad_norm = g.norm();
          polish.converged = polish.grad_norm < config.grad_tol;
          polish.iterations += run.iterations;
          run = polish;
        }
      }
    }
    total_iter += run.iterations;
    if (!have_best || run.value < best.value) {
      best = run;
      have_best = true;
    }
  }
  best.iterations = total_iter;
  return best;
}

}  // namespace mddest
