// Fourier reconstruction of the potential from DN data with exponential
// (Calderon) boundary data.
//
// Convention: qhat(zeta) = int q(x) exp(-i zeta.x) dx, so the sample taken at
// frequency xi estimates qhat(-2 xi) = int q exp(2i xi.x) dx.

#ifndef CALDERON_RECON_HPP
#define CALDERON_RECON_HPP

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "calderon/dnmap.hpp"
#include "calderon/linearize.hpp"

namespace calderon {

struct CalderonData {
  Eigen::Vector2d xi;
  Eigen::Vector2d eta;  // xi rotated by +90 degrees
  BoundaryField f1;     // trace of exp((eta + i xi).x)
  BoundaryField f2;     // trace of exp((-eta + i xi).x)
  BoundaryField fill;   // constant 1, used for f_3..f_m
};

// Throws std::invalid_argument for xi = 0.
CalderonData calderon_pair(const DomainPtr& domain, const Eigen::Vector2d& xi);

// exp((a + i b).x) sampled at every node.
Field exponential_field(const DomainPtr& domain, const Eigen::Vector2d& a, const Eigen::Vector2d& b);

struct FrequencySample {
  Eigen::Vector2d xi{0.0, 0.0};
  Complex qhat{0.0, 0.0};
  double fd_step = 0.0;
  int solves = 0;
};

struct ReconstructionOptions {
  // Per-component bound on |xi_1|, |xi_2|.
  double xi_max = 4.0;
  std::optional<double> fd_step;
};

// -(1/m!) sum_boundary  d^m/dlambda_1..dlambda_m Lambda_q(sum lambda_k f_k).
// xi = 0 uses all-ones data for the zero-frequency term.
FrequencySample reconstruct_qhat(const DnMap& map, const Eigen::Vector2d& xi,
                                 const ReconstructionOptions& opts = {});
FrequencySample reconstruct_qhat(const RealField& q, int m, const Eigen::Vector2d& xi,
                                 const SolverConfig& cfg, const ReconstructionOptions& opts = {});

// Square lattice {-k..k}^2 * spacing, xi_1 major.
std::vector<Eigen::Vector2d> frequency_lattice(int k, double spacing = 1.0);

struct SweepEntry {
  Eigen::Vector2d xi;
  std::optional<FrequencySample> sample;
  std::string error;
};

// One entry per lattice point in input order; failures are recorded, not thrown.
std::vector<SweepEntry> frequency_sweep(const DnMap& map, const std::vector<Eigen::Vector2d>& xis,
                                        const ReconstructionOptions& opts = {}, int threads = 1);

struct Reconstruction {
  RealField q;
  double imaginary_residue = 0.0;  // max |Im| of the summed series
};

// Truncated Fourier series (2 pi)^-2 sum qhat(-2xi) exp(-2i xi.x) dzeta.
// Throws std::invalid_argument unless the samples fill a rectangular lattice.
Reconstruction inverse_transform(const std::vector<FrequencySample>& samples,
                                 const DomainPtr& domain);

// Quadrature of int q exp(2i xi.x) dx with the domain's cell weights.
Complex fourier_quadrature(const RealField& q, const Eigen::Vector2d& xi);

// ||rec - truth||_2 / ||truth||_2 over nodes where truth >= fraction * max(truth).
double relative_l2_error(const RealField& rec, const RealField& truth, double support_fraction);

// CSV with header xi1,xi2,re_qhat,im_qhat,fd_step.
void write_samples_csv(std::ostream& out, const std::vector<FrequencySample>& samples);
std::vector<FrequencySample> read_samples_csv(std::istream& in);

}  // namespace calderon

#endif  // CALDERON_RECON_HPP
