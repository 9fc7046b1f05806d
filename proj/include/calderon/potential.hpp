// Potentials q built from a small vocabulary of terms.

#ifndef CALDERON_POTENTIAL_HPP
#define CALDERON_POTENTIAL_HPP

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "calderon/domain.hpp"

namespace calderon {

struct ConstantTerm {
  double value = 0.0;
};

// amplitude * exp(-|x - center|^2 / (2 width^2))
struct GaussianTerm {
  Point center{0.5, 0.5};
  double width = 0.15;
  double amplitude = 1.0;
};

// amplitude * |x - center|^(-alpha). Nodes within h/2 of the center take the
// cap value, h^(-alpha) unless overridden.
struct SingularTerm {
  Point center{0.5, 0.5};
  double alpha = 1.0;
  double amplitude = 1.0;
  std::optional<double> cap;
};

using PotentialTerm = std::variant<ConstantTerm, GaussianTerm, SingularTerm>;

struct PotentialSpec {
  std::vector<PotentialTerm> terms;

  static PotentialSpec constant(double c) { return {{ConstantTerm{c}}}; }
  static PotentialSpec gaussian(Point center, double width, double amplitude) {
    return {{GaussianTerm{center, width, amplitude}}};
  }
  static PotentialSpec singular(Point center, double alpha, double amplitude = 1.0) {
    return {{SingularTerm{center, alpha, amplitude, std::nullopt}}};
  }

  bool is_zero() const;
  // Throws unless every singular term satisfies alpha * p < 2.
  void check_integrability(double p) const;
};

// Sum of `count` Gaussian bumps with centres, widths and signed amplitudes
// (|a| <= amplitude) drawn from a fixed-seed generator. Centres stay well
// inside the given shape.
PotentialSpec random_smooth(std::uint64_t seed, int count, double amplitude, Shape shape);

RealField evaluate(const PotentialSpec& spec, const DomainPtr& domain);

// Point value away from singular centres (no capping).
double evaluate_at(const PotentialSpec& spec, const Point& x);

}  // namespace calderon

#endif  // CALDERON_POTENTIAL_HPP
