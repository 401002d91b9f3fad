#pragma once

#include <cstdint>
#include <span>

#include "aitpr/tape.hpp"
#include "aitpr/tensor.hpp"

namespace aitpr {

// Role vectors stored row-wise, [n x d_m]. Generated roles are orthonormal.
struct RoleSet {
  Tensor roles;

  std::size_t count() const { return roles.empty() ? 0 : roles.dim(0); }
  std::size_t dim() const { return roles.empty() ? 0 : roles.dim(1); }
  Tensor role(std::size_t j) const { return roles.row(j); }
};

// Filler (content) vectors stored row-wise, [n x d_n].
struct FillerSet {
  Tensor fillers;

  static FillerSet from_rows(std::span<const Tensor> rows) { return {stack_rows(rows)}; }
  std::size_t count() const { return fillers.empty() ? 0 : fillers.dim(0); }
  std::size_t dim() const { return fillers.empty() ? 0 : fillers.dim(1); }
};

// s = sum_i f_i r_i^T, shape [d_n x d_m].
struct BoundRepresentation {
  Tensor s;
};

// Orthonormal roles from a seeded Gaussian matrix, via Gram-Schmidt with one
// re-orthogonalisation pass. Throws ConfigError when n > d_m or n == 0.
RoleSet generate_roles(std::size_t n, std::size_t d_m, std::uint64_t seed);

BoundRepresentation bind(const FillerSet& fillers, const RoleSet& roles);

// s r_j. Recovers f_j exactly (up to rounding) when the roles are orthonormal.
Tensor unbind(const BoundRepresentation& bound, const Tensor& role);

// Elementwise binding used inside the decoder gate.
Tensor hadamard_bind(const Tensor& context, const Tensor& role);
Var hadamard_bind(Var context, Var role);

}  // namespace aitpr
