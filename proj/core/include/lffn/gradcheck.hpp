#pragma once

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace lffn {

struct GradCheckReport {
  std::string op;
  double max_rel_error = 0.0;
  std::vector<std::pair<std::string, double>> param_errors;
  bool pass = false;
  double tolerance = 0.0;

  std::string str() const;
};

// One checked parameter: `values` is perturbed in place (and restored),
// `analytic` is the gradient under test, same length.
struct GradCheckParam {
  std::string name;
  std::span<double> values;
  std::span<const double> analytic;
};

// Compares `analytic` against central finite differences of `loss` on every
// element of every parameter. Relative error uses max(1, |a|, |n|) as the
// denominator; non-finite values fail the check.
GradCheckReport grad_check(const std::string& op, const std::function<double()>& loss,
                           std::vector<GradCheckParam> params, double tolerance,
                           double step = 1e-5);

// Full per-layer and end-to-end gradient sweep used by the CLI and the
// acceptance suite. Returns one report per checked operation.
std::vector<GradCheckReport> run_gradcheck_suite(std::uint64_t seed, double layer_tolerance = 1e-6,
                                                 double composite_tolerance = 1e-5);

}  // namespace lffn
