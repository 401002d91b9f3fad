#include "aitpr/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "aitpr/errors.hpp"

namespace aitpr {

namespace {

double evaluate(const ScalarFunction& f, std::span<const Tensor> params) {
  Tape tape;
  std::vector<Var> vars;
  vars.reserve(params.size());
  for (const auto& p : params) vars.push_back(tape.parameter(p));
  Var out = f(tape, vars);
  if (out.value().size() != 1) throw DimensionError("grad_check: function must return a scalar");
  return out.value()[0];
}

}  // namespace

std::vector<Tensor> tape_gradients(const ScalarFunction& f, std::span<const Tensor> params, double* value) {
  Tape tape;
  std::vector<Var> vars;
  vars.reserve(params.size());
  for (const auto& p : params) vars.push_back(tape.parameter(p));
  Var out = f(tape, vars);
  tape.backward(out);
  if (value) *value = out.value()[0];
  std::vector<Tensor> grads;
  grads.reserve(vars.size());
  for (const auto& v : vars) grads.push_back(v.grad());
  return grads;
}

GradCheckReport grad_check(const ScalarFunction& f, std::span<const Tensor> params, const GradCheckOptions& options) {
  if (!(options.eps > 0.0)) throw ConfigError("grad_check: eps must be positive");

  auto analytic = tape_gradients(f, params);
  if (options.corrupt_offset != 0.0 && !analytic.empty() && !analytic.front().empty()) {
    analytic.front()[0] += options.corrupt_offset;
  }

  std::vector<Tensor> probe(params.begin(), params.end());
  GradCheckReport report;
  report.per_param.assign(params.size(), 0.0);
  for (std::size_t p = 0; p < probe.size(); ++p) {
    for (std::size_t i = 0; i < probe[p].size(); ++i) {
      const double original = probe[p][i];
      probe[p][i] = original + options.eps;
      const double up = evaluate(f, probe);
      probe[p][i] = original - options.eps;
      const double down = evaluate(f, probe);
      probe[p][i] = original;

      const double numeric = (up - down) / (2.0 * options.eps);
      const double exact = analytic[p][i];
      const double denom = std::max({1.0, std::abs(exact), std::abs(numeric)});
      const double err = std::abs(exact - numeric) / denom;
      report.per_param[p] = std::max(report.per_param[p], err);
    }
    report.max_relative_error = std::max(report.max_relative_error, report.per_param[p]);
  }
  return report;
}

}  // namespace aitpr
