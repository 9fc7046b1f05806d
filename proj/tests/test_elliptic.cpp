#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "calderon/elliptic.hpp"
#include "calderon/potential.hpp"

using namespace calderon;

namespace {

constexpr double kPi = std::numbers::pi;

double sup_diff(const Field& a, const Field& b) { return (a.values() - b.values()).cwiseAbs().maxCoeff(); }

BoundaryField data_from(const DomainPtr& d, double amp, double (*fn)(const Point&)) {
  return sample_boundary<Complex>(d, [&](const Point& x) { return Complex(amp * fn(x)); });
}

double sin_theta(const Point& x) { return std::sin(std::atan2(x.y(), x.x())); }
double shifted_x1(const Point& x) { return (2.0 + x.x()) / 3.0; }

}  // namespace

TEST(Poisson, AffineDataIsExact) {
  const DomainPtr d = build_domain(Shape::square, 40);
  const RealField exact = sample<double>(d, [](const Point& x) { return x.x(); });
  const RealField u = solve_poisson(RealField(d), trace(exact));
  EXPECT_LE((u.values() - exact.values()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Poisson, QuadraticIsExactOnBothShapes) {
  for (Shape shape : {Shape::square, Shape::disk}) {
    const DomainPtr d = build_domain(shape, 50);
    const RealField exact = sample<double>(d, [](const Point& x) { return x.squaredNorm(); });
    const RealField rhs(d, RealVector::Constant(d->num_nodes(), 4.0));
    const RealField u = solve_poisson(rhs, trace(exact));
    EXPECT_LE((u.values() - exact.values()).cwiseAbs().maxCoeff(), 1e-12) << to_string(shape);
  }
}

TEST(Poisson, SineEigenfunctionSecondOrder) {
  std::vector<double> errs;
  for (int n : {32, 64, 128}) {
    const DomainPtr d = build_domain(Shape::square, n);
    const auto s = [](const Point& x) { return std::sin(kPi * x.x()) * std::sin(kPi * x.y()); };
    const RealField u = solve_poisson(sample<double>(d, s), RealBoundaryField(d));
    const RealField exact = sample<double>(d, [&](const Point& x) { return -s(x) / (2 * kPi * kPi); });
    errs.push_back((u.values() - exact.values()).cwiseAbs().maxCoeff());
  }
  for (std::size_t k = 1; k < errs.size(); ++k) EXPECT_NEAR(std::log2(errs[k - 1] / errs[k]), 2.0, 0.5);
}

TEST(Poisson, DiskManufacturedSolutionConverges) {
  // u = exp(x1) sin(x2) + x1^2 x2, Lap u = 2 x2
  std::vector<double> errs;
  for (int n : {32, 64, 128}) {
    const DomainPtr d = build_domain(Shape::disk, n);
    const auto fn = [](const Point& x) { return std::exp(x.x()) * std::sin(x.y()) + x.x() * x.x() * x.y(); };
    const RealField exact = sample<double>(d, fn);
    const RealField rhs = sample<double>(d, [](const Point& x) { return 2.0 * x.y(); });
    const RealField u = solve_poisson(rhs, trace(exact));
    errs.push_back((u.values() - exact.values()).cwiseAbs().maxCoeff());
  }
  EXPECT_GT(std::log2(errs[0] / errs[2]) / 2.0, 1.5);
}

TEST(Poisson, ComplexMatchesRealParts) {
  const DomainPtr d = build_domain(Shape::disk, 30);
  const RealBoundaryField a = sample_boundary<double>(d, [](const Point& x) { return x.x() * x.y(); });
  const RealBoundaryField b = sample_boundary<double>(d, [](const Point& x) { return std::cos(3 * x.x()); });
  const BoundaryField g(d, a.values().cast<Complex>() + Complex(0, 1) * b.values().cast<Complex>());
  const Field u = harmonic_extension(g);
  EXPECT_LE((u.values().real() - harmonic_extension(a).values()).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE((u.values().imag() - harmonic_extension(b).values()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Poisson, LaplacianOfSolutionMatchesRhs) {
  const DomainPtr d = build_domain(Shape::disk, 64);
  const RealField rhs = sample<double>(d, [](const Point& x) { return std::exp(x.x() - x.y()); });
  const RealField u = solve_poisson(rhs, RealBoundaryField(d));
  EXPECT_LE((apply_laplacian(u).interior() - rhs.interior()).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Semilinear, ZeroPotentialIsOneLinearSolve) {
  const DomainPtr d = build_domain(Shape::square, 32);
  const BoundaryField f = data_from(d, 1e-3, shifted_x1);
  const SemilinearSolution sol = solve_semilinear({RealField(d), 2, f}, SolverConfig{});
  EXPECT_EQ(sol.diagnostics.iterations, 1);
  EXPECT_EQ(sup_diff(sol.u, harmonic_extension(f)), 0.0);
}

TEST(Semilinear, ZeroDataGivesZero) {
  const DomainPtr d = build_domain(Shape::disk, 32);
  const RealField q = evaluate(PotentialSpec::constant(5.0), d);
  const SemilinearSolution sol = solve_semilinear({q, 3, BoundaryField(d)}, SolverConfig{});
  EXPECT_EQ(sup_norm(sol.u), 0.0);
}

TEST(Semilinear, ConstantPotentialDiskAgainstLongIteration) {
  const DomainPtr d = build_domain(Shape::disk, 64);
  const RealField q = evaluate(PotentialSpec::constant(1.0), d);
  const BoundaryField f = data_from(d, 1e-3, sin_theta);
  const SemilinearSolution sol = solve_semilinear({q, 2, f}, SolverConfig{});
  EXPECT_LE(semilinear_residual(sol.u, q, 2), 1e-9);
  const Field lin = harmonic_extension(f);
  EXPECT_LE(sup_diff(sol.u, lin), 1e-5);

  // Independent fixed-point oracle: 200 plain Picard steps.
  Field u = lin;
  for (int k = 0; k < 200; ++k) {
    Field rhs(d, (-q.values().cast<Complex>().array() * u.values().array().square()).matrix());
    u = solve_poisson(rhs, f);
  }
  EXPECT_LE(sup_diff(sol.u, u), 1e-12);
}

TEST(Semilinear, ResidualBoundAfterConvergence) {
  SolverConfig cfg;
  const DomainPtr d = build_domain(Shape::square, 64);
  const RealField q = evaluate(PotentialSpec::gaussian({0.3, 0.6}, 0.2, 3.0), d);
  const SemilinearSolution sol = solve_semilinear({q, 3, data_from(d, 5e-2, shifted_x1)}, cfg);
  EXPECT_LE(sol.diagnostics.last_update, cfg.picard_tol);
  EXPECT_LE(sol.diagnostics.residual, 10 * cfg.picard_tol);
  EXPECT_EQ(sol.diagnostics.residual, semilinear_residual(sol.u, q, 3));
}

TEST(Semilinear, ContractionHalvesUpdates) {
  const DomainPtr d = build_domain(Shape::disk, 48);
  const RealField q = evaluate(PotentialSpec::constant(200.0), d);
  SolverConfig cfg;
  cfg.picard_tol = 1e-15;
  const SemilinearSolution sol = solve_semilinear({q, 2, data_from(d, 1e-3, shifted_x1)}, cfg);
  const auto& up = sol.diagnostics.updates;
  ASSERT_GE(up.size(), 3u);
  for (std::size_t k = 2; k < up.size(); ++k)
    if (up[k - 1] > 1e-17) EXPECT_LE(up[k], 0.5 * up[k - 1]) << k;
}

TEST(Semilinear, UniqueWithinSmallClass) {
  const DomainPtr d = build_domain(Shape::square, 48);
  const RealField q = evaluate(PotentialSpec::gaussian({0.5, 0.5}, 0.15, 10.0), d);
  const BoundaryField f = data_from(d, 1e-3, shifted_x1);
  const SemilinearSolution a = solve_semilinear({q, 2, f}, SolverConfig{}, Field(d));
  const SemilinearSolution b = solve_semilinear({q, 2, f}, SolverConfig{}, harmonic_extension(f));
  EXPECT_LE(sup_diff(a.u, b.u), 1e-9);
}

TEST(Semilinear, SmallnessViolation) {
  const DomainPtr d = build_domain(Shape::square, 16);
  const RealField q = evaluate(PotentialSpec::constant(1.0), d);
  try {
    solve_semilinear({q, 2, data_from(d, 0.2, shifted_x1)}, SolverConfig{});
    FAIL() << "expected a smallness error";
  } catch (const SolverError& e) {
    EXPECT_EQ(e.kind(), SolverError::Kind::smallness);
  }
}

TEST(Semilinear, BlowupIsNonConvergence) {
  const DomainPtr d = build_domain(Shape::square, 24);
  const RealField q = evaluate(PotentialSpec::constant(1e5), d);
  try {
    solve_semilinear({q, 2, data_from(d, 9e-2, shifted_x1)}, SolverConfig{});
    FAIL() << "expected a non-convergence error";
  } catch (const SolverError& e) {
    EXPECT_EQ(e.kind(), SolverError::Kind::non_convergence);
  }
}

TEST(Semilinear, IterationCapIsNonConvergence) {
  const DomainPtr d = build_domain(Shape::square, 24);
  const RealField q = evaluate(PotentialSpec::constant(50.0), d);
  SolverConfig cfg;
  cfg.max_iter = 2;
  EXPECT_THROW(solve_semilinear({q, 2, data_from(d, 9e-2, shifted_x1)}, cfg), SolverError);
}

TEST(SolverConfig, Validation) {
  SolverConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.max_iter = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = SolverConfig{};
  cfg.delta = -1.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Semilinear, RejectsInvalidPower) {
  const DomainPtr d = build_domain(Shape::square, 16);
  EXPECT_THROW(solve_semilinear({RealField(d), 1, BoundaryField(d)}, SolverConfig{}), std::invalid_argument);
}

TEST(NormRatio, MaximumPrincipleForZeroPotential) {
  const DomainPtr d = build_domain(Shape::square, 40);
  const BoundaryField f = sample_boundary<Complex>(d, [](const Point& x) { return Complex(1e-2 * x.x()); });
  EXPECT_LE(norm_ratio({RealField(d), 2, f}, SolverConfig{}), 1.0 + 1e-8);
  EXPECT_EQ(norm_ratio({RealField(d), 2, BoundaryField(d)}, SolverConfig{}), 0.0);
}

TEST(NormRatio, LinearRegimeDominates) {
  const DomainPtr d = build_domain(Shape::square, 64);
  const RealField q = evaluate(PotentialSpec::constant(1.0), d);
  std::vector<double> ratios;
  for (double amp : {1e-4, 1e-3, 1e-2}) {
    const BoundaryField f(d, ComplexVector::Constant(d->num_boundary(), amp));
    ratios.push_back(norm_ratio({q, 2, f}, SolverConfig{}));
    // Direct-solve oracle: sup|u| of the converged solution over sup|f|.
    EXPECT_DOUBLE_EQ(ratios.back(), sup_norm(solve_semilinear({q, 2, f}, SolverConfig{}).u) / amp);
  }
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  EXPECT_LT((*hi - *lo) / *lo, 0.05);
  EXPECT_GT(*hi, 1.0);  // interior bulge from the nonlinearity
}

TEST(NormRatio, BoundedAcrossShippedPotentials) {
  for (Shape shape : {Shape::square, Shape::disk}) {
    const DomainPtr d = build_domain(shape, 48);
    const Point c = shape == Shape::square ? Point(0.5, 0.5) : Point(0.1, 0.2);
    for (const PotentialSpec& spec :
         {PotentialSpec::constant(1.0), PotentialSpec::gaussian(c, 0.15, 1.0), PotentialSpec::singular(c, 1.0)}) {
      const RealField q = evaluate(spec, d);
      for (int m : {2, 3}) {
        const BoundaryField f(d, ComplexVector::Constant(d->num_boundary(), 1e-3));
        EXPECT_LT(norm_ratio({q, m, f}, SolverConfig{}), 1.01);
      }
    }
  }
}

TEST(Potential, SingularTermIsCapped) {
  const DomainPtr d = build_domain(Shape::square, 33);  // (0.5, 0.5) is a node
  const RealField q = evaluate(PotentialSpec::singular({0.5, 0.5}, 1.0), d);
  EXPECT_NEAR(q.values().maxCoeff(), 1.0 / d->h(), 1e-9);
  EXPECT_THROW(PotentialSpec::singular({0.5, 0.5}, 1.5).check_integrability(1.5), std::invalid_argument);
  EXPECT_NO_THROW(PotentialSpec::singular({0.5, 0.5}, 1.0).check_integrability(1.5));
}

TEST(Potential, RandomSmoothIsReproducible) {
  const PotentialSpec a = random_smooth(42, 3, 1.0, Shape::disk);
  const PotentialSpec b = random_smooth(42, 3, 1.0, Shape::disk);
  const PotentialSpec c = random_smooth(43, 3, 1.0, Shape::disk);
  const Point x(0.1, -0.2);
  EXPECT_EQ(evaluate_at(a, x), evaluate_at(b, x));
  EXPECT_NE(evaluate_at(a, x), evaluate_at(c, x));
  EXPECT_EQ(a.terms.size(), 3u);
}
