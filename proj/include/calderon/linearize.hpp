// Mixed derivatives of lambda -> Lambda_q(sum_k lambda_k f_k) at lambda = 0.
//
// Two independent routes: a central-difference tensor stencil that only calls
// the DN map, and the direct linearized system
//   Lap v^k = 0, v^k = f_k;   Lap w = -m! q prod_k v^k, w = 0,
// whose normal derivative d_nu w is the exact m-th derivative.

#ifndef CALDERON_LINEARIZE_HPP
#define CALDERON_LINEARIZE_HPP

#include <optional>
#include <vector>

#include "calderon/dnmap.hpp"

namespace calderon {

struct LinearizationRequest {
  std::vector<BoundaryField> data;
  // Which data directions to differentiate along, each to first order.
  std::vector<std::size_t> indices;
  // Finite-difference step on the sup-normalized data. Defaults to
  // 1e-2 * delta / m with automatic halving; an explicit step is never altered.
  std::optional<double> step;

  void validate() const;
};

struct FdDerivative {
  BoundaryField value;
  double step = 0.0;
  int solves = 0;
};

double default_fd_step(const SolverConfig& cfg, int m);

// Laplace DN map: d_nu of the harmonic extension of f.
BoundaryField first_linearization(const BoundaryField& f);

FdDerivative mth_fd_derivative(const LinearizationRequest& request, const DnMap& map);

struct MthLinearization {
  std::vector<Field> harmonic;  // v^k
  Field product;                // prod_k v^k
  Field w;
  BoundaryField trace;          // d_nu w
};

// Harmonic extensions of the data and their product, shared between potentials.
struct HarmonicProduct {
  std::vector<Field> harmonic;
  Field product;
};

HarmonicProduct harmonic_product(const std::vector<BoundaryField>& data);

MthLinearization mth_linearization(const RealField& q, int m, const HarmonicProduct& hp);
MthLinearization mth_linearization(const RealField& q, int m, const std::vector<BoundaryField>& data);

// Exact m-th derivative, used as ground truth for mth_fd_derivative.
BoundaryField direct_mth_oracle(const RealField& q, int m, const std::vector<BoundaryField>& data);

double factorial(int m);

}  // namespace calderon

#endif  // CALDERON_LINEARIZE_HPP
