// Two-sided numerical checks of the integral identities that link interior
// products of harmonic functions to boundary data of the m-th linearization.

#ifndef CALDERON_IDENTITIES_HPP
#define CALDERON_IDENTITIES_HPP

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "calderon/dnmap.hpp"
#include "calderon/linearize.hpp"

namespace calderon {

struct IdentityReport {
  Complex lhs{0.0, 0.0};
  Complex rhs{0.0, 0.0};
  double abs_residual = 0.0;
  // abs_residual / max(|lhs|, |rhs|, 1e-30)
  double rel_residual = 0.0;
  int resolution = 0;
  double tolerance = 0.0;
  std::vector<std::string> warnings;
  std::map<std::string, double> details;

  bool passed() const { return rel_residual <= tolerance; }
  nlohmann::json to_json() const;
};

IdentityReport make_report(Complex lhs, Complex rhs, int resolution, double tolerance);

// lhs = int m! (q1 - q2) prod v^k,   rhs = -int_boundary d_nu (w1 - w2).
IdentityReport verify_full_identity(const RealField& q1, const RealField& q2, int m,
                                    const std::vector<BoundaryField>& data,
                                    double tolerance = 1e-2);

// With v0 the harmonic extension of g >= 0 supported in the patch:
// lhs = -int m! (q1 - q2) v0 prod v^k,  rhs = int_boundary v0 d_nu (w1 - w2).
IdentityReport verify_partial_identity(const RealField& q1, const RealField& q2, int m,
                                       const BoundaryPatch& patch, const BoundaryField& g,
                                       const std::vector<BoundaryField>& data,
                                       double tolerance = 1e-2);

// Poisson kernel of the unit disk, (1 - |x|^2) / (2 pi |x - y|^2).
// Throws DomainError on the square; std::invalid_argument unless |x| < 1, |y| = 1.
double poisson_kernel(const DiscreteDomain& domain, const Point& x, const Point& y);

// Harmonic measure, seen from x, of the counterclockwise boundary arc
// from angle t1 to angle t2 (t2 - t1 in (0, 2 pi)).
double harmonic_measure(const Point& x, double t1, double t2);

// Psi(x) = int P(x, y) dmu(y) at interior nodes; boundary entries hold the
// density part of mu (atoms have no point trace).
Field psi_from_measure(const BoundaryMeasure& mu);

// Quadrature weights for int F Psi dx: cell mass times Psi, with cells near an
// atom integrated on a 4x4 sub-grid.
ComplexVector psi_quadrature_weights(const BoundaryMeasure& mu);

// int_boundary d_nu w dmu  versus  int (Lap w) Psi dx  for w = solve_poisson(phi, 0).
IdentityReport verify_measure_pairing(const BoundaryMeasure& mu, const RealField& phi,
                                      double tolerance = 5e-2);

// lhs = int_boundary d_nu (w1 - w2) dmu,  rhs = -int m! (q1 - q2) prod v^k Psi.
IdentityReport verify_onepoint_identity(const RealField& q1, const RealField& q2, int m,
                                        const BoundaryMeasure& mu,
                                        const std::vector<BoundaryField>& data,
                                        double tolerance = 5e-2);

}  // namespace calderon

#endif  // CALDERON_IDENTITIES_HPP
