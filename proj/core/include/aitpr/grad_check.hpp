#pragma once

#include <functional>
#include <span>
#include <vector>

#include "aitpr/tape.hpp"

namespace aitpr {

// Builds a scalar on `tape` from parameter leaves. Must be deterministic.
using ScalarFunction = std::function<Var(Tape& tape, std::span<const Var> params)>;

struct GradCheckOptions {
  double eps = 1e-5;
  // Debug hook: added to the first analytic gradient entry. Used as a
  // negative control to prove the checker can fail.
  double corrupt_offset = 0.0;
};

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::vector<double> per_param;  // max relative error for each parameter tensor
};

// Compares tape gradients with central differences over every entry of every
// parameter. The error for one entry is
//   |analytic - numeric| / max(1, |analytic|, |numeric|).
GradCheckReport grad_check(const ScalarFunction& f, std::span<const Tensor> params, const GradCheckOptions& options = {});

// Analytic gradients only, one tensor per parameter.
std::vector<Tensor> tape_gradients(const ScalarFunction& f, std::span<const Tensor> params, double* value = nullptr);

}  // namespace aitpr
