#pragma once

// Reference computations used only by tests. Nothing here calls into the
// production code path it is used to check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "flowgnn/egraphsage.hpp"

namespace oracle {

/// erf by Maclaurin series for x <= 2 and by the Laplace continued fraction
/// for erfc beyond, both in long double.
inline long double erf_series(long double x) {
  constexpr long double kTwoOverSqrtPi = 1.1283791670955125738961589031215452L;
  if (x < 0) return -erf_series(-x);
  if (x <= 2.0L) {
    long double sum = 0.0L;
    long double power = x;  // x^(2n+1) / n!  with alternating sign
    for (int n = 0; n < 200; ++n) {
      const long double term = power / (2 * n + 1);
      sum += term;
      if (std::fabs(term) < 1e-25L) break;
      power *= -x * x / (n + 1);
    }
    return kTwoOverSqrtPi * sum;
  }
  // erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + 2/(x + ...)))))
  long double tail = x;
  for (int n = 400; n >= 1; --n) tail = x + (n / 2.0L) / tail;
  const long double erfc = std::exp(-x * x) / std::sqrt(3.14159265358979323846264338327950288L) / tail;
  return 1.0L - erfc;
}

inline double tanh_log_degree(double n, double k) { return std::tanh(std::log(n / k)); }

struct GradientCheck {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  std::size_t non_smooth = 0;  // stencil crosses a ReLU kink; central difference undefined there
};

namespace detail {

inline std::vector<bool> relu_pattern(const flowgnn::sage::ForwardCache& c) {
  std::vector<bool> out;
  out.reserve(static_cast<std::size_t>(c.p1.size() + c.p2.size()));
  for (Eigen::Index i = 0; i < c.p1.size(); ++i) out.push_back(c.p1.data()[i] > 0.0);
  for (Eigen::Index i = 0; i < c.p2.size(); ++i) out.push_back(c.p2.data()[i] > 0.0);
  return out;
}

}  // namespace detail

/// Central differences with step `eps` on every parameter, compared against
/// `analytic`. Relative error is |a - n| / max(|a|, |n|, floor).
/// Entries whose +/- eps perturbation flips any ReLU are counted in
/// `non_smooth` and left out of the maximum.
inline GradientCheck finite_difference_check(const flowgnn::sage::GraphTensors& t,
                                             const flowgnn::sage::ModelParams& params, std::span<const int> labels,
                                             std::span<const double> weights,
                                             const flowgnn::sage::Sampling& sampling,
                                             const flowgnn::sage::ModelParams& analytic, double eps,
                                             double floor = 1e-7) {
  using namespace flowgnn::sage;
  GradientCheck out;
  ForwardCache base_cache;
  forward(t, params, sampling, &base_cache);
  const auto base_pattern = detail::relu_pattern(base_cache);

  auto perturbed = params;
  auto eval = [&](std::vector<bool>& pattern) {
    ForwardCache c;
    const auto logits = forward(t, perturbed, sampling, &c);
    pattern = detail::relu_pattern(c);
    return loss(logits, labels, weights);
  };

  auto check_tensor = [&](auto& tensor, const auto& grad) {
    for (Eigen::Index i = 0; i < tensor.size(); ++i) {
      const double saved = tensor.data()[i];
      std::vector<bool> plus_pattern, minus_pattern;
      tensor.data()[i] = saved + eps;
      const double plus = eval(plus_pattern);
      tensor.data()[i] = saved - eps;
      const double minus = eval(minus_pattern);
      tensor.data()[i] = saved;
      if (plus_pattern != base_pattern || minus_pattern != base_pattern) {
        ++out.non_smooth;
        continue;
      }
      const double numeric = (plus - minus) / (2.0 * eps);
      const double a = grad.data()[i];
      const double rel = std::fabs(a - numeric) / std::max({std::fabs(a), std::fabs(numeric), floor});
      out.max_relative_error = std::max(out.max_relative_error, rel);
      ++out.checked;
    }
  };
  check_tensor(perturbed.w1, analytic.w1);
  check_tensor(perturbed.b1, analytic.b1);
  check_tensor(perturbed.w2, analytic.w2);
  check_tensor(perturbed.b2, analytic.b2);
  check_tensor(perturbed.wc, analytic.wc);
  check_tensor(perturbed.bc, analytic.bc);
  return out;
}

}  // namespace oracle
