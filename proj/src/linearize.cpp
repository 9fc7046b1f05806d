#include "calderon/linearize.hpp"

#include <bit>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace calderon {

void LinearizationRequest::validate() const {
  if (data.empty()) throw std::invalid_argument("linearization needs at least one data function");
  if (indices.empty()) throw std::invalid_argument("linearization needs at least one index");
  for (std::size_t i : indices)
    if (i >= data.size()) throw std::invalid_argument("linearization index out of range");
  if (step && !(*step > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
}

double default_fd_step(const SolverConfig& cfg, int m) { return 1e-2 * cfg.delta / m; }

double factorial(int m) {
  double f = 1.0;
  for (int k = 2; k <= m; ++k) f *= k;
  return f;
}

BoundaryField first_linearization(const BoundaryField& f) {
  return normal_derivative(harmonic_extension(f));
}

FdDerivative mth_fd_derivative(const LinearizationRequest& request, const DnMap& map) {
  request.validate();
  const DomainPtr& domain = map.domain_ptr();
  const std::size_t order = request.indices.size();

  // Unit sup-norm directions; the multilinear scale is restored at the end.
  std::vector<ComplexVector> directions;
  double scale = 1.0;
  for (std::size_t i : request.indices) {
    const BoundaryField& f = request.data[i];
    require_same_domain(f.domain(), *domain);
    const double size = sup_norm(f);
    if (size == 0.0) return {BoundaryField(domain), 0.0, 0};
    directions.push_back(f.values() / size);
    scale *= size;
  }

  const std::size_t corners = std::size_t{1} << order;
  const auto stencil_point = [&](std::size_t mask, double step) {
    ComplexVector g = ComplexVector::Zero(domain->num_boundary());
    for (std::size_t k = 0; k < order; ++k) g += ((mask >> k) & 1 ? -step : step) * directions[k];
    return g;
  };
  const auto max_amplitude = [&](double step) {
    double worst = 0.0;
    for (std::size_t mask = 0; mask < corners; ++mask)
      worst = std::max(worst, stencil_point(mask, step).cwiseAbs().maxCoeff());
    return worst;
  };

  const double delta = map.config().delta;
  double step = request.step.value_or(default_fd_step(map.config(), map.power()));
  if (request.step) {
    if (!(max_amplitude(step) < delta)) {
      std::ostringstream msg;
      msg << "finite-difference stencil with step " << step << " leaves the smallness ball";
      throw SolverError(SolverError::Kind::smallness, msg.str());
    }
  } else {
    int halvings = 0;
    while (!(max_amplitude(step) < delta)) {
      step *= 0.5;
      if (++halvings > 60) throw SolverError(SolverError::Kind::smallness, "step halving failed");
    }
  }

  // Fixed summation order over sign patterns keeps the result bit-stable.
  ComplexVector acc = ComplexVector::Zero(domain->num_boundary());
  for (std::size_t mask = 0; mask < corners; ++mask) {
    const int negatives = std::popcount(mask);
    const double sign = negatives % 2 == 0 ? 1.0 : -1.0;
    const BoundaryField trace = map.apply(BoundaryField(domain, stencil_point(mask, step)));
    acc += sign * trace.values();
  }
  acc *= scale / std::pow(2.0 * step, static_cast<double>(order));
  return {BoundaryField(domain, std::move(acc)), step, static_cast<int>(corners)};
}

HarmonicProduct harmonic_product(const std::vector<BoundaryField>& data) {
  if (data.empty()) throw std::invalid_argument("linearization needs at least one data function");
  const DomainPtr& domain = data.front().domain_ptr();
  HarmonicProduct hp{{}, Field(domain, ComplexVector::Ones(domain->num_nodes()))};
  for (const BoundaryField& f : data) {
    require_same_domain(f.domain(), *domain);
    hp.harmonic.push_back(harmonic_extension(f));
    hp.product.values().array() *= hp.harmonic.back().values().array();
  }
  return hp;
}

MthLinearization mth_linearization(const RealField& q, int m, const HarmonicProduct& hp) {
  if (static_cast<int>(hp.harmonic.size()) != m)
    throw std::invalid_argument("m-th linearization needs exactly m data functions");
  require_same_domain(q.domain(), hp.product.domain());
  const DomainPtr& domain = q.domain_ptr();
  Field rhs(domain, (-factorial(m) * q.values().cast<Complex>().array() *
                     hp.product.values().array())
                        .matrix());
  Field w = solve_poisson(rhs, BoundaryField(domain));
  BoundaryField trace = normal_derivative(w);
  return {hp.harmonic, hp.product, std::move(w), std::move(trace)};
}

MthLinearization mth_linearization(const RealField& q, int m,
                                   const std::vector<BoundaryField>& data) {
  return mth_linearization(q, m, harmonic_product(data));
}

BoundaryField direct_mth_oracle(const RealField& q, int m, const std::vector<BoundaryField>& data) {
  return mth_linearization(q, m, data).trace;
}

}  // namespace calderon
