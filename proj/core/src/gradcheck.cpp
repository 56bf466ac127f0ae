#include "lffn/gradcheck.hpp"

#include <cmath>
#include <sstream>

#include "lffn/errors.hpp"

namespace lffn {

std::string GradCheckReport::str() const {
  std::ostringstream os;
  os << (pass ? "pass" : "FAIL") << " " << op << " max_rel_error=" << max_rel_error
     << " tolerance=" << tolerance;
  return os.str();
}

GradCheckReport grad_check(const std::string& op, const std::function<double()>& loss,
                           std::vector<GradCheckParam> params, double tolerance, double step) {
  GradCheckReport report;
  report.op = op;
  report.tolerance = tolerance;
  bool finite = true;
  for (auto& param : params) {
    if (param.values.size() != param.analytic.size())
      throw DimensionError("grad_check(" + op + "): parameter '" + param.name + "' has " +
                           std::to_string(param.values.size()) + " values but " +
                           std::to_string(param.analytic.size()) + " analytic gradients");
    double worst = 0.0;
    for (std::size_t i = 0; i < param.values.size(); ++i) {
      const double saved = param.values[i];
      param.values[i] = saved + step;
      const double plus = loss();
      param.values[i] = saved - step;
      const double minus = loss();
      param.values[i] = saved;
      const double numeric = (plus - minus) / (2.0 * step);
      const double analytic = param.analytic[i];
      const double denom = std::max({1.0, std::abs(analytic), std::abs(numeric)});
      const double rel = std::abs(analytic - numeric) / denom;
      if (!std::isfinite(rel)) finite = false;
      worst = std::max(worst, rel);
    }
    report.param_errors.emplace_back(param.name, worst);
    report.max_rel_error = std::max(report.max_rel_error, worst);
  }
  report.pass = finite && std::isfinite(report.max_rel_error) && report.max_rel_error < tolerance;
  return report;
}

}  // namespace lffn
