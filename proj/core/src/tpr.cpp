#include "aitpr/tpr.hpp"

#include <cmath>
#include <random>
#include <string>

#include "aitpr/errors.hpp"

namespace aitpr {

RoleSet generate_roles(std::size_t n, std::size_t d_m, std::uint64_t seed) {
  if (n == 0 || d_m == 0) throw ConfigError("generate_roles: n and d_m must be positive");
  if (n > d_m) {
    throw ConfigError("generate_roles: cannot fit " + std::to_string(n) + " orthonormal roles in dimension " +
                      std::to_string(d_m));
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Tensor roles({n, d_m});
  for (auto& v : roles.data()) v = gauss(rng);

  for (std::size_t i = 0; i < n; ++i) {
    double* ri = &roles.at(i, 0);
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t j = 0; j < i; ++j) {
        const double* rj = &roles.at(j, 0);
        double proj = 0.0;
        for (std::size_t k = 0; k < d_m; ++k) proj += ri[k] * rj[k];
        for (std::size_t k = 0; k < d_m; ++k) ri[k] -= proj * rj[k];
      }
    }
    double norm = 0.0;
    for (std::size_t k = 0; k < d_m; ++k) norm += ri[k] * ri[k];
    norm = std::sqrt(norm);
    if (norm < 1e-12) throw NumericError("generate_roles: degenerate draw for role " + std::to_string(i));
    for (std::size_t k = 0; k < d_m; ++k) ri[k] /= norm;
  }
  return RoleSet{std::move(roles)};
}

BoundRepresentation bind(const FillerSet& fillers, const RoleSet& roles) {
  if (fillers.count() == 0 || roles.count() == 0) {
    throw DimensionError("bind: at least one filler/role pair is required");
  }
  if (fillers.count() != roles.count()) {
    throw DimensionError("bind: " + std::to_string(fillers.count()) + " fillers but " + std::to_string(roles.count()) +
                         " roles");
  }
  // s = F^T R
  return BoundRepresentation{matmul(transpose(fillers.fillers), roles.roles)};
}

Tensor unbind(const BoundRepresentation& bound, const Tensor& role) {
  if (bound.s.rank() != 2 || role.rank() != 1 || role.size() != bound.s.dim(1)) {
    throw DimensionError("unbind: role " + shape_to_string(role.shape()) + " incompatible with binding " +
                         shape_to_string(bound.s.shape()));
  }
  Tensor out({bound.s.dim(0)});
  for (std::size_t i = 0; i < bound.s.dim(0); ++i) out[i] = dot(bound.s.row_span(i), role.data());
  return out;
}

Tensor hadamard_bind(const Tensor& context, const Tensor& role) {
  if (context.shape() != role.shape()) {
    throw DimensionError("hadamard_bind: " + shape_to_string(context.shape()) + " vs " + shape_to_string(role.shape()));
  }
  return mul(context, role);
}

Var hadamard_bind(Var context, Var role) { return mul(context, role); }

}  // namespace aitpr
