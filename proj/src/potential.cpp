#include "calderon/potential.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace calderon {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double term_value(const PotentialTerm& term, const Point& x, double h) {
  return std::visit(
      overloaded{
          [](const ConstantTerm& t) { return t.value; },
          [&](const GaussianTerm& t) {
            return t.amplitude * std::exp(-(x - t.center).squaredNorm() / (2.0 * t.width * t.width));
          },
          [&](const SingularTerm& t) {
            const double r = (x - t.center).norm();
            if (h > 0.0 && r < 0.5 * h) return t.amplitude * t.cap.value_or(std::pow(h, -t.alpha));
            return t.amplitude * std::pow(r, -t.alpha);
          },
      },
      term);
}

}  // namespace

bool PotentialSpec::is_zero() const {
  for (const auto& term : terms) {
    const bool zero = std::visit(overloaded{
                                     [](const ConstantTerm& t) { return t.value == 0.0; },
                                     [](const GaussianTerm& t) { return t.amplitude == 0.0; },
                                     [](const SingularTerm& t) { return t.amplitude == 0.0; },
                                 },
                                 term);
    if (!zero) return false;
  }
  return true;
}

void PotentialSpec::check_integrability(double p) const {
  constexpr double dimension = 2.0;
  for (const auto& term : terms) {
    if (const auto* s = std::get_if<SingularTerm>(&term)) {
      if (!(s->alpha * p < dimension))
        throw std::invalid_argument("singular term with alpha = " + std::to_string(s->alpha) +
                                    " is not in L^" + std::to_string(p) + " (need alpha * p < 2)");
    }
  }
}

PotentialSpec random_smooth(std::uint64_t seed, int count, double amplitude, Shape shape) {
  if (count < 1) throw std::invalid_argument("random potential needs at least one term");
  std::mt19937_64 rng(seed);
  // Explicit 53-bit mapping; std::uniform_real_distribution is not portable.
  const auto uniform = [&rng](double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
  };
  PotentialSpec spec;
  for (int k = 0; k < count; ++k) {
    GaussianTerm t;
    if (shape == Shape::square) {
      t.center = {uniform(0.25, 0.75), uniform(0.25, 0.75)};
    } else {
      const double r = 0.5 * std::sqrt(uniform(0.0, 1.0));
      const double a = uniform(0.0, 2.0 * std::numbers::pi);
      t.center = {r * std::cos(a), r * std::sin(a)};
    }
    t.width = uniform(0.1, 0.25);
    t.amplitude = uniform(-amplitude, amplitude);
    spec.terms.push_back(t);
  }
  return spec;
}

RealField evaluate(const PotentialSpec& spec, const DomainPtr& domain) {
  const double h = domain->h();
  return sample<double>(domain, [&](const Point& x) {
    double v = 0.0;
    for (const auto& term : spec.terms) v += term_value(term, x, h);
    return v;
  });
}

double evaluate_at(const PotentialSpec& spec, const Point& x) {
  double v = 0.0;
  for (const auto& term : spec.terms) v += term_value(term, x, 0.0);
  return v;
}

}  // namespace calderon
