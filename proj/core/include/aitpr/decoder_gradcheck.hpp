#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aitpr/decoder.hpp"
#include "aitpr/grad_check.hpp"
#include "aitpr/params.hpp"

namespace aitpr {

// Largest decoder the finite-difference suite accepts.
inline constexpr std::size_t kMaxGradCheckParams = 10000;

struct DecoderGradCheckResult {
  std::vector<std::string> names;    // one per parameter group
  std::vector<double> errors;        // max relative error per group
  double max_error = 0.0;
  double loss = 0.0;
};

// Teacher-forced loss of a random caption over random region features
// (3 attribute and 2 interaction vectors), checked against central
// differences for every parameter entry. Throws ConfigError when the model has
// kMaxGradCheckParams or more scalars.
DecoderGradCheckResult check_decoder_gradients(const ModelDims& dims, const DecoderOptions& options,
                                               std::uint64_t seed, const GradCheckOptions& check = {});

}  // namespace aitpr
