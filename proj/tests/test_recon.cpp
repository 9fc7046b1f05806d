#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "calderon/potential.hpp"
#include "calderon/recon.hpp"

using namespace calderon;

namespace {

constexpr double kPi = std::numbers::pi;

// Closed-form int_[0,1]^2 exp(2i xi.x) dx.
Complex unit_square_transform(const Eigen::Vector2d& xi) {
  Complex out = 1.0;
  for (int j = 0; j < 2; ++j)
    if (xi[j] != 0.0) out *= (std::exp(Complex(0, 2 * xi[j])) - 1.0) / Complex(0, 2 * xi[j]);
  return out;
}

// Closed-form transform of A exp(-|x-c|^2 / (2 s^2)) over the whole plane.
Complex gaussian_transform(const Eigen::Vector2d& xi, const Point& c, double s, double a) {
  return a * 2 * kPi * s * s * std::exp(-2 * s * s * xi.squaredNorm()) * std::exp(Complex(0, 2 * xi.dot(c)));
}

std::vector<FrequencySample> oracle_samples(int k, const Point& c, double s, double a) {
  std::vector<FrequencySample> out;
  for (const auto& xi : frequency_lattice(k)) {
    FrequencySample fs;
    fs.xi = xi;
    fs.qhat = gaussian_transform(xi, c, s, a);
    out.push_back(fs);
  }
  return out;
}

}  // namespace

TEST(CalderonPair, RotatedDirectionAndProduct) {
  const DomainPtr d = build_domain(Shape::square, 24);
  const CalderonData cd = calderon_pair(d, {1.0, 0.0});
  EXPECT_EQ(cd.eta, Eigen::Vector2d(0.0, 1.0));
  EXPECT_EQ(calderon_pair(d, {0.0, 2.0}).eta, Eigen::Vector2d(-2.0, 0.0));
  for (Eigen::Index j = 0; j < d->num_boundary(); ++j) {
    const Point x = d->position(d->boundary_node(j));
    const Complex expect = std::exp(Complex(0, 2 * x.x()));
    EXPECT_NEAR(std::abs(cd.f1[j] * cd.f2[j] - expect), 0.0, 1e-14);
    EXPECT_EQ(cd.fill[j], Complex(1.0));
  }
}

TEST(CalderonPair, ExponentsAreHarmonic) {
  for (const Eigen::Vector2d xi : {Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 2), Eigen::Vector2d(3, 4)}) {
    const CalderonData cd = calderon_pair(build_domain(Shape::disk, 16), xi);
    EXPECT_EQ(cd.eta.dot(cd.xi), 0.0);
    EXPECT_EQ(cd.eta.norm(), cd.xi.norm());
  }
  // Discrete Laplacian residual of the sampled exponential is O(h^2).
  std::vector<double> res;
  for (int n : {64, 128}) {
    const DomainPtr d = build_domain(Shape::square, n);
    const Eigen::Vector2d xi(3, 4), eta(-4, 3);
    const Field v = exponential_field(d, eta, xi);
    res.push_back(apply_laplacian(v).values().cwiseAbs().maxCoeff() / sup_norm(v));
  }
  EXPECT_NEAR(res[0] / res[1], 4.0, 0.3);
}

TEST(CalderonPair, ZeroFrequencyThrows) {
  EXPECT_THROW(calderon_pair(build_domain(Shape::square, 16), {0.0, 0.0}), std::invalid_argument);
}

TEST(ReconstructQhat, ZeroPotential) {
  const DomainPtr d = build_domain(Shape::square, 32);
  for (const Eigen::Vector2d xi : {Eigen::Vector2d(0, 0), Eigen::Vector2d(2, -1)})
    EXPECT_LE(std::abs(reconstruct_qhat(RealField(d), 2, xi, SolverConfig{}).qhat), 1e-6);
}

TEST(ReconstructQhat, ConstantPotentialClosedForm) {
  const double c = 0.5;
  const DomainPtr d = build_domain(Shape::square, 128);
  const DnMap map(evaluate(PotentialSpec::constant(c), d), 2);
  for (const Eigen::Vector2d xi : {Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0), Eigen::Vector2d(0, -2),
                                   Eigen::Vector2d(2, 3), Eigen::Vector2d(-3, 1), Eigen::Vector2d(4, 0)}) {
    const Complex expect = c * unit_square_transform(xi);
    const FrequencySample s = reconstruct_qhat(map, xi);
    EXPECT_LE(std::abs(s.qhat - expect), 0.05 * std::abs(expect)) << xi.transpose();
    EXPECT_EQ(s.solves, 4);
  }
}

TEST(ReconstructQhat, GaussianMatchesQuadrature) {
  for (Shape shape : {Shape::square, Shape::disk}) {
    const DomainPtr d = build_domain(shape, 96);
    const Point c = shape == Shape::square ? Point(0.5, 0.5) : Point(0.1, -0.1);
    const RealField q = evaluate(PotentialSpec::gaussian(c, 0.15, 1.0), d);
    const DnMap map(q, 3);
    for (const Eigen::Vector2d xi : {Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 2), Eigen::Vector2d(-2, 0)}) {
      const Complex expect = fourier_quadrature(q, xi);
      EXPECT_LE(std::abs(reconstruct_qhat(map, xi).qhat - expect), 0.05 * std::abs(expect))
          << to_string(shape) << " " << xi.transpose();
    }
  }
}

TEST(ReconstructQhat, FrequencyBeyondBound) {
  const DomainPtr d = build_domain(Shape::square, 16);
  const DnMap map(RealField(d), 2);
  EXPECT_THROW(reconstruct_qhat(map, {5.0, 0.0}), std::invalid_argument);
  ReconstructionOptions wide;
  wide.xi_max = 5.0;
  EXPECT_NO_THROW(reconstruct_qhat(map, {5.0, 0.0}, wide));
}

TEST(ReconstructQhat, ExplicitStepIsRecorded) {
  const DomainPtr d = build_domain(Shape::square, 24);
  ReconstructionOptions opts;
  opts.fd_step = 3e-4;
  EXPECT_EQ(reconstruct_qhat(DnMap(RealField(d), 2), {1, 1}, opts).fd_step, 3e-4);
}

TEST(FourierQuadrature, ConstantMatchesClosedForm) {
  const DomainPtr d = build_domain(Shape::square, 128);
  const RealField one = evaluate(PotentialSpec::constant(1.0), d);
  for (const Eigen::Vector2d xi : {Eigen::Vector2d(1, 0), Eigen::Vector2d(3, -2)})
    EXPECT_LE(std::abs(fourier_quadrature(one, xi) - unit_square_transform(xi)), 1e-3);
}

TEST(FrequencySweep, EmptySingleAndSymmetry) {
  const DomainPtr d = build_domain(Shape::square, 48);
  const RealField q = evaluate(PotentialSpec::gaussian({0.4, 0.6}, 0.15, 1.0), d);
  const DnMap map(q, 2);
  EXPECT_TRUE(frequency_sweep(map, {}).empty());

  const auto single = frequency_sweep(map, {Eigen::Vector2d(1, 0)});
  ASSERT_EQ(single.size(), 1u);
  ASSERT_TRUE(single[0].sample);
  EXPECT_EQ(single[0].sample->qhat, reconstruct_qhat(map, {1, 0}).qhat);

  const auto sym = frequency_sweep(map, {Eigen::Vector2d(2, 1), Eigen::Vector2d(-2, -1)});
  const Complex a = sym[0].sample->qhat, b = sym[1].sample->qhat;
  EXPECT_LE(std::abs(a - std::conj(b)), 1e-3 * std::abs(a));
}

TEST(FrequencySweep, FailuresAreRecorded) {
  const DomainPtr d = build_domain(Shape::square, 16);
  const auto out = frequency_sweep(DnMap(RealField(d), 2), {Eigen::Vector2d(9, 0), Eigen::Vector2d(1, 0)});
  EXPECT_FALSE(out[0].sample);
  EXPECT_FALSE(out[0].error.empty());
  EXPECT_TRUE(out[1].sample);
}

TEST(FrequencySweep, ThreadCountDoesNotChangeResults) {
  const DomainPtr d = build_domain(Shape::disk, 40);
  const DnMap map(evaluate(PotentialSpec::gaussian({0.0, 0.2}, 0.2, 1.0), d), 2);
  const auto xis = frequency_lattice(2);
  const auto serial = frequency_sweep(map, xis, {}, 1);
  const auto parallel = frequency_sweep(map, xis, {}, 3);
  ASSERT_EQ(serial.size(), xis.size());
  for (std::size_t k = 0; k < xis.size(); ++k) {
    EXPECT_EQ(serial[k].xi, xis[k]);
    EXPECT_EQ(serial[k].sample->qhat, parallel[k].sample->qhat);
  }
}

TEST(FrequencyLattice, OrderAndSize) {
  const auto l = frequency_lattice(1, 0.5);
  ASSERT_EQ(l.size(), 9u);
  EXPECT_EQ(l.front(), Eigen::Vector2d(-0.5, -0.5));
  EXPECT_EQ(l[1], Eigen::Vector2d(-0.5, 0.0));
  EXPECT_EQ(l.back(), Eigen::Vector2d(0.5, 0.5));
  EXPECT_EQ(frequency_lattice(0).size(), 1u);
}

TEST(InverseTransform, ZeroAndEmpty) {
  const DomainPtr d = build_domain(Shape::square, 16);
  std::vector<FrequencySample> zeros;
  for (const auto& xi : frequency_lattice(2)) zeros.push_back({xi, 0.0, 0.0, 0});
  EXPECT_EQ(sup_norm(inverse_transform(zeros, d).q), 0.0);
  EXPECT_EQ(sup_norm(inverse_transform({}, d).q), 0.0);
}

TEST(InverseTransform, SingleSampleIsOneExponential) {
  const DomainPtr d = build_domain(Shape::square, 20);
  const Complex a(0.3, -0.4);
  const Eigen::Vector2d xi(1, 2);
  const Reconstruction r = inverse_transform({{xi, a, 0.0, 0}}, d);
  for (Eigen::Index i = 0; i < d->num_nodes(); ++i) {
    const Complex e = a * std::exp(Complex(0, -2 * xi.dot(d->position(i)))) / (kPi * kPi);
    EXPECT_NEAR(r.q[i], e.real(), 1e-14);
  }
  EXPECT_GT(r.imaginary_residue, 0.0);
}

TEST(InverseTransform, RejectsNonLattice) {
  const DomainPtr d = build_domain(Shape::square, 16);
  EXPECT_THROW(inverse_transform({{{0, 0}, 1.0, 0, 0}, {{1, 0}, 1.0, 0, 0}, {{3, 0}, 1.0, 0, 0}}, d),
               std::invalid_argument);
  EXPECT_THROW(inverse_transform({{{0, 0}, 1.0, 0, 0}, {{1, 0}, 1.0, 0, 0}, {{0, 1}, 1.0, 0, 0}}, d),
               std::invalid_argument);
  EXPECT_THROW(inverse_transform({{{0, 0}, 1.0, 0, 0}, {{0, 0}, 1.0, 0, 0}}, d), std::invalid_argument);
}

TEST(InverseTransform, TruncationOfExactSamples) {
  // Independent NumPy evaluation of the same |xi_j| <= 4 partial sum for this
  // bump gives a relative L2 error of 0.265 on the 1% support.
  const Point c(0.5, 0.5);
  const DomainPtr d = build_domain(Shape::square, 128);
  const RealField q = evaluate(PotentialSpec::gaussian(c, 0.15, 0.5), d);
  const Reconstruction r = inverse_transform(oracle_samples(4, c, 0.15, 0.5), d);
  EXPECT_NEAR(relative_l2_error(r.q, q, 0.01), 0.265, 0.01);
  // Conjugate-symmetric samples sum to a real field.
  EXPECT_LE(r.imaginary_residue, 1e-12);

  std::vector<double> errs;
  for (int k : {2, 4, 6, 8}) errs.push_back(relative_l2_error(inverse_transform(oracle_samples(k, c, 0.15, 0.5), d).q, q, 0.01));
  for (std::size_t k = 1; k < errs.size(); ++k) EXPECT_LT(errs[k], errs[k - 1]);
  EXPECT_LT(errs.back(), 0.03);
}

TEST(Reconstruction, ImprovesWithFrequencyBound) {
  const DomainPtr d = build_domain(Shape::square, 64);
  const RealField q = evaluate(PotentialSpec::gaussian({0.5, 0.5}, 0.15, 0.5), d);
  const DnMap map(q, 2);
  std::vector<FrequencySample> all;
  for (const auto& e : frequency_sweep(map, frequency_lattice(4))) all.push_back(*e.sample);
  double previous = 1e300;
  for (int k : {2, 3, 4}) {
    std::vector<FrequencySample> sub;
    for (const auto& s : all)
      if (std::max(std::abs(s.xi.x()), std::abs(s.xi.y())) <= k) sub.push_back(s);
    const double err = relative_l2_error(inverse_transform(sub, d).q, q, 0.01);
    EXPECT_LT(err, previous) << k;
    previous = err;
  }
}

TEST(RelativeL2, SupportThreshold) {
  const DomainPtr d = build_domain(Shape::square, 32);
  const RealField truth = evaluate(PotentialSpec::gaussian({0.5, 0.5}, 0.1, 1.0), d);
  EXPECT_EQ(relative_l2_error(truth, truth, 0.01), 0.0);
  EXPECT_NEAR(relative_l2_error(RealField(d), truth, 0.0), 1.0, 1e-15);
  RealField off = truth;
  off.values() *= 1.1;
  EXPECT_NEAR(relative_l2_error(off, truth, 0.5), 0.1, 1e-12);
}

TEST(SamplesCsv, RoundTrip) {
  std::vector<FrequencySample> in{{{1, -2}, {0.1, 1.0 / 3.0}, 1e-3, 4}, {{0, 0}, {-5e-7, 0}, 5e-4, 4}};
  std::stringstream buf;
  write_samples_csv(buf, in);
  EXPECT_EQ(buf.str().substr(0, 31), "xi1,xi2,re_qhat,im_qhat,fd_step");
  const auto out = read_samples_csv(buf);
  ASSERT_EQ(out.size(), in.size());
  for (std::size_t k = 0; k < in.size(); ++k) {
    EXPECT_EQ(out[k].xi, in[k].xi);
    EXPECT_EQ(out[k].qhat, in[k].qhat);
    EXPECT_EQ(out[k].fd_step, in[k].fd_step);
  }
  std::stringstream bad("a,b\n");
  EXPECT_THROW(read_samples_csv(bad), std::invalid_argument);
  std::stringstream short_row("xi1,xi2,re_qhat,im_qhat,fd_step\n1,2,3\n");
  EXPECT_THROW(read_samples_csv(short_row), std::invalid_argument);
}
