#include "calderon/elliptic.hpp"

#include <cmath>
#include <sstream>

namespace calderon {

namespace {

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

double inf_norm(const SparseMatrix& a) {
  RealVector row_sums = RealVector::Zero(a.rows());
  for (Eigen::Index k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) row_sums[it.row()] += std::abs(it.value());
  return row_sums.size() ? row_sums.maxCoeff() : 0.0;
}

template <typename Scalar>
Vec<Scalar> lu_solve(const Eigen::SparseLU<SparseMatrix>& lu, const Vec<Scalar>& b) {
  if constexpr (std::is_same_v<Scalar, double>) {
    return lu.solve(b);
  } else {
    Eigen::MatrixX2d parts(b.size(), 2);
    parts.col(0) = b.real();
    parts.col(1) = b.imag();
    const Eigen::MatrixX2d x = lu.solve(parts);
    Vec<Scalar> out(b.size());
    out.real() = x.col(0);
    out.imag() = x.col(1);
    return out;
  }
}

}  // namespace

void SolverConfig::validate() const {
  if (!(picard_tol > 0.0) || !(delta > 0.0) || !(blowup_factor > 0.0) || max_iter < 1)
    throw std::invalid_argument("solver configuration values must be positive, max_iter >= 1");
}

template <typename Scalar>
GridFunction<Scalar> solve_poisson(const GridFunction<Scalar>& rhs,
                                   const BoundaryFunction<Scalar>& g) {
  require_same_domain(rhs.domain(), g.domain());
  const DiscreteDomain& d = rhs.domain();
  const Eigen::Index ni = d.num_interior();
  const Eigen::Index nb = d.num_boundary();
  const SparseMatrix& lap = d.laplacian();
  const SparseMatrix interior = lap.leftCols(ni);

  const Vec<Scalar> b = rhs.interior() - lap.rightCols(nb) * g.values();
  const auto& lu = d.dirichlet_factorization();
  Vec<Scalar> x = lu_solve<Scalar>(lu, b);

  const double scale_a = inf_norm(interior);
  double backward = 0.0;
  for (int pass = 0; pass < 3; ++pass) {
    const Vec<Scalar> r = b - interior * x;
    const double denom = scale_a * x.cwiseAbs().maxCoeff() + b.cwiseAbs().maxCoeff();
    backward = denom > 0.0 ? r.cwiseAbs().maxCoeff() / denom : 0.0;
    if (backward <= kLinearResidualTol) break;
    x += lu_solve<Scalar>(lu, r);
  }
  if (backward > kLinearResidualTol) {
    std::ostringstream msg;
    msg << "Poisson solve residual " << backward << " exceeds " << kLinearResidualTol << " ("
        << ni << " unknowns)";
    throw SolverError(SolverError::Kind::linear_solve, msg.str());
  }

  Vec<Scalar> out(d.num_nodes());
  out.head(ni) = x;
  out.tail(nb) = g.values();
  return GridFunction<Scalar>(rhs.domain_ptr(), std::move(out));
}

template GridFunction<double> solve_poisson(const GridFunction<double>&,
                                            const BoundaryFunction<double>&);
template GridFunction<Complex> solve_poisson(const GridFunction<Complex>&,
                                             const BoundaryFunction<Complex>&);

Field integer_power(const Field& u, int m) {
  ComplexVector out = ComplexVector::Ones(u.values().size());
  for (int k = 0; k < m; ++k) out.array() *= u.values().array();
  return Field(u.domain_ptr(), std::move(out));
}

double semilinear_residual(const Field& u, const RealField& q, int m) {
  require_same_domain(u.domain(), q.domain());
  const Eigen::Index ni = u.domain().num_interior();
  if (ni == 0) return 0.0;
  const ComplexVector lap = u.domain().laplacian() * u.values();
  const Field um = integer_power(u, m);
  return (lap.array() + q.interior().array() * um.interior().array()).abs().maxCoeff();
}

SemilinearSolution solve_semilinear(const SemilinearProblem& problem, const SolverConfig& cfg,
                                    const std::optional<Field>& initial) {
  cfg.validate();
  if (problem.m < 2) throw std::invalid_argument("semilinear power m must be at least 2");
  require_same_domain(problem.q.domain(), problem.f.domain());

  const double data_size = sup_norm(problem.f);
  if (!(data_size < cfg.delta)) {
    std::ostringstream msg;
    msg << "boundary data sup-norm " << data_size << " is not below delta = " << cfg.delta;
    throw SolverError(SolverError::Kind::smallness, msg.str());
  }

  const DomainPtr& domain = problem.q.domain_ptr();
  const ComplexVector q = problem.q.values().cast<Complex>();
  SolveDiagnostics diag;
  Field u = initial ? *initial : harmonic_extension(problem.f);
  require_same_domain(u.domain(), problem.q.domain());

  for (int k = 1; k <= cfg.max_iter; ++k) {
    Field rhs(domain, -(q.array() * integer_power(u, problem.m).values().array()).matrix());
    Field next = solve_poisson(rhs, problem.f);
    const double update = (next.values() - u.values()).cwiseAbs().maxCoeff();
    const double size = sup_norm(next);
    u = std::move(next);
    diag.iterations = k;
    diag.last_update = update;
    diag.updates.push_back(update);
    if (!std::isfinite(size) || size > cfg.blowup_factor * data_size) {
      std::ostringstream msg;
      msg << "Picard iterate left the small-solution class: sup|u| = " << size
          << " after " << k << " iterations";
      throw SolverError(SolverError::Kind::non_convergence, msg.str());
    }
    if (update <= cfg.picard_tol) {
      diag.residual = semilinear_residual(u, problem.q, problem.m);
      return {std::move(u), std::move(diag)};
    }
  }
  std::ostringstream msg;
  msg << "Picard iteration did not reach tolerance " << cfg.picard_tol << " in " << cfg.max_iter
      << " iterations (last update " << diag.last_update << ")";
  throw SolverError(SolverError::Kind::non_convergence, msg.str());
}

double norm_ratio(const SemilinearProblem& problem, const SolverConfig& cfg) {
  const double data_size = sup_norm(problem.f);
  if (data_size == 0.0) return 0.0;
  const SemilinearSolution sol = solve_semilinear(problem, cfg);
  return sup_norm(sol.u) / data_size;
}

}  // namespace calderon
