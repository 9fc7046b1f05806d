#include "calderon/identities.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace calderon {

namespace {

constexpr double kPi = std::numbers::pi;

double kernel(const Point& x, const Point& y) {
  return (1.0 - x.squaredNorm()) / (2.0 * kPi * (x - y).squaredNorm());
}

void require_disk(const DiscreteDomain& d, const char* what) {
  if (d.shape() != Shape::disk)
    throw DomainError(std::string(what) + " needs the disk (closed-form Poisson kernel)");
}

void require_real_nonnegative(const BoundaryField& g, const char* what) {
  bool nonzero = false;
  for (Eigen::Index j = 0; j < g.values().size(); ++j) {
    if (g[j].imag() != 0.0 || g[j].real() < 0.0)
      throw std::invalid_argument(std::string(what) + " must be real and nonnegative");
    nonzero = nonzero || g[j].real() > 0.0;
  }
  if (!nonzero) throw std::invalid_argument(std::string(what) + " must not vanish identically");
}

void require_supported(const BoundaryField& g, const BoundaryPatch& patch, const char* what) {
  for (Eigen::Index j = 0; j < g.values().size(); ++j)
    if (!patch.contains(j) && g[j] != Complex(0.0))
      throw std::invalid_argument(std::string(what) + " is not supported in the patch");
}

// m! (q1 - q2) prod v^k at every node.
ComplexVector weighted_difference(const RealField& q1, const RealField& q2, int m,
                                  const Field& product) {
  return (factorial(m) * (q1.values() - q2.values()).cast<Complex>().array() *
          product.values().array())
      .matrix();
}

}  // namespace

nlohmann::json IdentityReport::to_json() const {
  nlohmann::json j = {{"lhs", {lhs.real(), lhs.imag()}},
                      {"rhs", {rhs.real(), rhs.imag()}},
                      {"abs_residual", abs_residual},
                      {"rel_residual", rel_residual},
                      {"resolution", resolution},
                      {"tolerance", tolerance},
                      {"passed", passed()},
                      {"warnings", warnings}};
  for (const auto& [k, v] : details) j["details"][k] = v;
  return j;
}

IdentityReport make_report(Complex lhs, Complex rhs, int resolution, double tolerance) {
  IdentityReport r;
  r.lhs = lhs;
  r.rhs = rhs;
  r.abs_residual = std::abs(lhs - rhs);
  r.rel_residual = r.abs_residual / std::max({std::abs(lhs), std::abs(rhs), 1e-30});
  r.resolution = resolution;
  r.tolerance = tolerance;
  return r;
}

IdentityReport verify_full_identity(const RealField& q1, const RealField& q2, int m,
                                    const std::vector<BoundaryField>& data, double tolerance) {
  require_same_domain(q1.domain(), q2.domain());
  const HarmonicProduct hp = harmonic_product(data);
  const MthLinearization a = mth_linearization(q1, m, hp);
  const MthLinearization b = mth_linearization(q2, m, hp);

  const Field integrand(q1.domain_ptr(), weighted_difference(q1, q2, m, hp.product));
  const Complex lhs = integrate(integrand);
  const Complex rhs =
      -integrate_boundary(BoundaryField(q1.domain_ptr(), a.trace.values() - b.trace.values()));
  return make_report(lhs, rhs, q1.domain().resolution(), tolerance);
}

IdentityReport verify_partial_identity(const RealField& q1, const RealField& q2, int m,
                                       const BoundaryPatch& patch, const BoundaryField& g,
                                       const std::vector<BoundaryField>& data, double tolerance) {
  require_same_domain(q1.domain(), q2.domain());
  require_same_domain(q1.domain(), patch.domain());
  require_real_nonnegative(g, "auxiliary boundary data g");
  require_supported(g, patch, "auxiliary boundary data g");
  for (const auto& f : data) require_supported(f, patch, "linearization data");

  const Field v0 = harmonic_extension(g);
  const HarmonicProduct hp = harmonic_product(data);
  const MthLinearization a = mth_linearization(q1, m, hp);
  const MthLinearization b = mth_linearization(q2, m, hp);

  const DomainPtr& domain = q1.domain_ptr();
  const Field integrand(domain, (-weighted_difference(q1, q2, m, hp.product).array() *
                                 v0.values().array())
                                    .matrix());
  const Complex lhs = integrate(integrand);
  // w1 - w2 vanishes on the boundary, so the (w1 - w2) d_nu v0 term is exactly zero.
  const Complex rhs = integrate_boundary(BoundaryField(
      domain, (g.values().array() * (a.trace.values() - b.trace.values()).array()).matrix()));

  IdentityReport r = make_report(lhs, rhs, q1.domain().resolution(), tolerance);
  const double v0_min = v0.interior().size() ? v0.interior().real().minCoeff() : 0.0;
  r.details["v0_min"] = v0_min;
  r.details["v0_positive"] = v0_min > 0.0 ? 1.0 : 0.0;
  if (v0_min < -1e-10)
    r.warnings.push_back("discrete maximum principle violated: min v0 = " + std::to_string(v0_min));
  return r;
}

double poisson_kernel(const DiscreteDomain& domain, const Point& x, const Point& y) {
  require_disk(domain, "poisson_kernel");
  if (!(x.norm() < 1.0)) throw std::invalid_argument("poisson_kernel: x must be interior");
  if (std::abs(y.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("poisson_kernel: y must lie on the unit circle");
  return kernel(x, y);
}

double harmonic_measure(const Point& x, double t1, double t2) {
  const double r = x.norm();
  const double phi = std::atan2(x.y(), x.x());
  const double k = (1.0 + r) / (1.0 - r);
  const auto wrap = [](double d) {
    d = std::remainder(d, 2.0 * kPi);
    return d <= -kPi ? d + 2.0 * kPi : d;
  };
  // Antiderivative of the kernel in the boundary angle, relative to phi.
  const auto primitive = [k](double d) {
    return std::atan2(k * std::sin(0.5 * d), std::cos(0.5 * d)) / kPi;
  };
  const double d1 = wrap(t1 - phi);
  const double d2 = wrap(t2 - phi);
  double w = primitive(d2) - primitive(d1);
  if (d2 < d1) w += 1.0;
  return w;
}

Field psi_from_measure(const BoundaryMeasure& mu) {
  const DiscreteDomain& d = mu.domain();
  require_disk(d, "psi_from_measure");
  const Eigen::Index ni = d.num_interior();
  const Eigen::Index nb = d.num_boundary();
  const RealVector& theta = d.boundary_parameter();
  const RealVector& bw = d.boundary_weights();

  // Dual arcs of the boundary nodes; the density is taken constant on each.
  std::vector<double> arc_start(nb), arc_end(nb);
  for (Eigen::Index j = 0; j < nb; ++j) {
    double before = theta[j] - theta[(j + nb - 1) % nb];
    if (before <= 0.0) before += 2.0 * kPi;
    arc_start[j] = theta[j] - 0.5 * before;
    arc_end[j] = arc_start[j] + bw[j];
  }

  ComplexVector psi = ComplexVector::Zero(d.num_nodes());
  for (Eigen::Index i = 0; i < ni; ++i) {
    const Point x = d.position(i);
    Complex v = 0.0;
    for (const auto& a : mu.atoms()) v += a.weight * kernel(x, d.position(d.boundary_node(a.node)));
    if (mu.density()) {
      for (Eigen::Index j = 0; j < nb; ++j) {
        const Complex rho = (*mu.density())[j];
        if (rho != Complex(0.0)) v += rho * harmonic_measure(x, arc_start[j], arc_end[j]);
      }
    }
    psi[i] = v;
  }
  if (mu.density()) psi.tail(nb) = mu.density()->values();
  return Field(mu.domain_ptr(), std::move(psi));
}

ComplexVector psi_quadrature_weights(const BoundaryMeasure& mu) {
  const DiscreteDomain& d = mu.domain();
  require_disk(d, "psi_quadrature_weights");
  const Field psi = psi_from_measure(mu);
  const double h = d.h();
  const double near_radius = 2.0 * h;

  // Mean of P(., y) over the part of the cell inside the disk.
  const auto cell_mean = [&](const QuadratureCell& cell, const Point& y) {
    for (int level = 4; level <= 16; level *= 4) {
      double sum = 0.0;
      int inside = 0;
      for (int p = 0; p < level; ++p) {
        for (int q = 0; q < level; ++q) {
          const Point s = cell.center + h * Point((p + 0.5) / level - 0.5, (q + 0.5) / level - 0.5);
          if (s.squaredNorm() >= 1.0) continue;
          sum += kernel(s, y);
          ++inside;
        }
      }
      if (inside > 0) return sum / inside;
    }
    return 0.0;
  };

  ComplexVector weights = ComplexVector::Zero(d.num_nodes());
  for (const QuadratureCell& cell : d.quadrature_cells()) {
    const Point owner = d.position(cell.owner);
    const bool on_boundary = d.is_boundary(cell.owner);
    Complex atoms_at_owner = 0.0;
    Complex atom_part = 0.0;
    for (const auto& a : mu.atoms()) {
      const Point y = d.position(d.boundary_node(a.node));
      if (!on_boundary) atoms_at_owner += a.weight * kernel(owner, y);
      if (on_boundary || (cell.center - y).norm() <= near_radius)
        atom_part += a.weight * cell_mean(cell, y);
      else
        atom_part += a.weight * kernel(owner, y);
    }
    const Complex density_part = psi[cell.owner] - atoms_at_owner;
    weights[cell.owner] += cell.area * (density_part + atom_part);
  }
  return weights;
}

IdentityReport verify_measure_pairing(const BoundaryMeasure& mu, const RealField& phi,
                                      double tolerance) {
  require_same_domain(mu.domain(), phi.domain());
  const DomainPtr& domain = mu.domain_ptr();
  const Field w = solve_poisson(complexify(phi), BoundaryField(domain));
  const Complex lhs = mu.pair(normal_derivative(w));
  const ComplexVector weights = psi_quadrature_weights(mu);
  const Complex rhs = (weights.array() * phi.values().cast<Complex>().array()).sum();
  return make_report(lhs, rhs, domain->resolution(), tolerance);
}

IdentityReport verify_onepoint_identity(const RealField& q1, const RealField& q2, int m,
                                        const BoundaryMeasure& mu,
                                        const std::vector<BoundaryField>& data,
                                        double tolerance) {
  require_same_domain(q1.domain(), q2.domain());
  require_same_domain(q1.domain(), mu.domain());
  require_disk(q1.domain(), "verify_onepoint_identity");
  for (std::size_t k = 2; k < data.size(); ++k)
    require_real_nonnegative(data[k], "fill data f_k, k >= 3,");

  const HarmonicProduct hp = harmonic_product(data);
  const MthLinearization a = mth_linearization(q1, m, hp);
  const MthLinearization b = mth_linearization(q2, m, hp);
  const DomainPtr& domain = q1.domain_ptr();

  const Complex lhs = mu.pair(BoundaryField(domain, a.trace.values() - b.trace.values()));
  const ComplexVector weights = psi_quadrature_weights(mu);
  const Complex rhs = -(weights.array() * weighted_difference(q1, q2, m, hp.product).array()).sum();

  IdentityReport r = make_report(lhs, rhs, q1.domain().resolution(), tolerance);
  r.details["measure_total_variation"] = mu.total_variation();
  double snap = 0.0;
  for (const auto& atom : mu.atoms()) snap = std::max(snap, atom.snap_distance);
  r.details["max_snap_distance"] = snap;
  return r;
}

}  // namespace calderon
