// Linear Dirichlet-Poisson solves and the small-data Picard solver for
//   Lap u + q u^m = 0 in the domain,  u = f on the boundary.

#ifndef CALDERON_ELLIPTIC_HPP
#define CALDERON_ELLIPTIC_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "calderon/domain.hpp"

namespace calderon {

class SolverError : public std::runtime_error {
 public:
  enum class Kind { linear_solve, smallness, non_convergence };

  SolverError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct SolverConfig {
  double picard_tol = 1e-10;
  int max_iter = 100;
  // Bound on sup|f| defining the small-data class.
  double delta = 1e-1;
  // Iterates larger than blowup_factor * sup|f| count as divergence.
  double blowup_factor = 1e3;

  void validate() const;
};

// Relative backward error accepted from a linear solve.
inline constexpr double kLinearResidualTol = 1e-12;

struct SemilinearProblem {
  RealField q;
  int m = 2;
  BoundaryField f;
};

struct SolveDiagnostics {
  int iterations = 0;
  // sup-norm of the last Picard update
  double last_update = 0.0;
  // sup over interior nodes of |Lap u + q u^m|
  double residual = 0.0;
  std::vector<double> updates;
};

struct SemilinearSolution {
  Field u;
  SolveDiagnostics diagnostics;
};

// Discrete Lap u = rhs at interior nodes, u = g on the boundary. Only the
// interior entries of `rhs` are read.
template <typename Scalar>
GridFunction<Scalar> solve_poisson(const GridFunction<Scalar>& rhs,
                                   const BoundaryFunction<Scalar>& g);

// Harmonic extension of boundary data.
template <typename Scalar>
GridFunction<Scalar> harmonic_extension(const BoundaryFunction<Scalar>& g) {
  return solve_poisson(GridFunction<Scalar>(g.domain_ptr()), g);
}

// Discrete Lap u at interior nodes (boundary entries are zero).
template <typename Scalar>
GridFunction<Scalar> apply_laplacian(const GridFunction<Scalar>& u) {
  typename GridFunction<Scalar>::Vector out =
      GridFunction<Scalar>::Vector::Zero(u.domain().num_nodes());
  out.head(u.domain().num_interior()) = u.domain().laplacian() * u.values();
  return GridFunction<Scalar>(u.domain_ptr(), std::move(out));
}

Field integer_power(const Field& u, int m);

// sup over interior nodes of |Lap u + q u^m|.
double semilinear_residual(const Field& u, const RealField& q, int m);

// Picard iteration u_{k+1} = solve_poisson(-q u_k^m, f) starting from the
// harmonic extension of f (or `initial` when given).
SemilinearSolution solve_semilinear(const SemilinearProblem& problem, const SolverConfig& cfg,
                                    const std::optional<Field>& initial = std::nullopt);

// sup|u| / sup|f|, 0 for zero data.
double norm_ratio(const SemilinearProblem& problem, const SolverConfig& cfg);

}  // namespace calderon

#endif  // CALDERON_ELLIPTIC_HPP
