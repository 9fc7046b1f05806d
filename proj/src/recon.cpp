#include "calderon/recon.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace calderon {

namespace {

constexpr double kPi = std::numbers::pi;

// Distinct values of one coordinate, with the lattice spacing between them.
std::vector<double> lattice_axis(const std::vector<FrequencySample>& samples, int axis,
                                 double& spacing) {
  std::vector<double> v;
  for (const auto& s : samples) v.push_back(s.xi[axis]);
  std::sort(v.begin(), v.end());
  std::vector<double> unique;
  for (double x : v)
    if (unique.empty() || std::abs(x - unique.back()) > 1e-9) unique.push_back(x);
  spacing = 1.0;
  if (unique.size() > 1) {
    spacing = unique[1] - unique[0];
    for (std::size_t k = 2; k < unique.size(); ++k)
      if (std::abs(unique[k] - unique[k - 1] - spacing) > 1e-9 * std::max(1.0, spacing))
        throw std::invalid_argument("frequency samples are not on a uniform lattice");
  }
  return unique;
}

}  // namespace

Field exponential_field(const DomainPtr& domain, const Eigen::Vector2d& a,
                        const Eigen::Vector2d& b) {
  return sample<Complex>(domain, [&](const Point& x) { return std::exp(Complex(a.dot(x), b.dot(x))); });
}

CalderonData calderon_pair(const DomainPtr& domain, const Eigen::Vector2d& xi) {
  if (xi.norm() == 0.0)
    throw std::invalid_argument("Calderon exponentials need a nonzero frequency");
  const Eigen::Vector2d eta(-xi.y(), xi.x());
  const auto trace_of = [&](const Eigen::Vector2d& a) {
    return sample_boundary<Complex>(domain,
                                    [&](const Point& x) { return std::exp(Complex(a.dot(x), xi.dot(x))); });
  };
  return {xi, eta, trace_of(eta), trace_of(-eta),
          BoundaryField(domain, ComplexVector::Ones(domain->num_boundary()))};
}

FrequencySample reconstruct_qhat(const DnMap& map, const Eigen::Vector2d& xi,
                                 const ReconstructionOptions& opts) {
  if (std::max(std::abs(xi.x()), std::abs(xi.y())) > opts.xi_max + 1e-12) {
    std::ostringstream msg;
    msg << "frequency (" << xi.x() << ", " << xi.y() << ") exceeds xi_max = " << opts.xi_max;
    throw std::invalid_argument(msg.str());
  }
  const DomainPtr& domain = map.domain_ptr();
  const int m = map.power();
  const BoundaryField ones(domain, ComplexVector::Ones(domain->num_boundary()));

  LinearizationRequest req;
  if (xi.norm() == 0.0) {
    req.data.assign(m, ones);
  } else {
    CalderonData pair = calderon_pair(domain, xi);
    req.data = {std::move(pair.f1), std::move(pair.f2)};
    while (static_cast<int>(req.data.size()) < m) req.data.push_back(pair.fill);
  }
  for (int k = 0; k < m; ++k) req.indices.push_back(static_cast<std::size_t>(k));
  req.step = opts.fd_step;

  const FdDerivative d = mth_fd_derivative(req, map);
  FrequencySample s;
  s.xi = xi;
  s.qhat = -integrate_boundary(d.value) / factorial(m);
  s.fd_step = d.step;
  s.solves = d.solves;
  return s;
}

FrequencySample reconstruct_qhat(const RealField& q, int m, const Eigen::Vector2d& xi,
                                 const SolverConfig& cfg, const ReconstructionOptions& opts) {
  return reconstruct_qhat(DnMap(q, m, cfg), xi, opts);
}

std::vector<Eigen::Vector2d> frequency_lattice(int k, double spacing) {
  std::vector<Eigen::Vector2d> out;
  for (int a = -k; a <= k; ++a)
    for (int b = -k; b <= k; ++b) out.emplace_back(a * spacing, b * spacing);
  return out;
}

std::vector<SweepEntry> frequency_sweep(const DnMap& map, const std::vector<Eigen::Vector2d>& xis,
                                        const ReconstructionOptions& opts, int threads) {
  std::vector<SweepEntry> out(xis.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t k = next.fetch_add(1); k < xis.size(); k = next.fetch_add(1)) {
      out[k].xi = xis[k];
      try {
        out[k].sample = reconstruct_qhat(map, xis[k], opts);
      } catch (const std::exception& e) {
        out[k].error = e.what();
      }
    }
  };
  const int count = std::max(1, std::min<int>(threads, static_cast<int>(xis.size())));
  if (count == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < count; ++t) pool.emplace_back(worker);
  }
  return out;
}

Reconstruction inverse_transform(const std::vector<FrequencySample>& samples,
                                 const DomainPtr& domain) {
  RealField zero(domain);
  if (samples.empty()) return {zero, 0.0};

  double d1 = 1.0, d2 = 1.0;
  const auto ax1 = lattice_axis(samples, 0, d1);
  const auto ax2 = lattice_axis(samples, 1, d2);
  if (ax1.size() * ax2.size() != samples.size())
    throw std::invalid_argument("frequency samples do not fill a rectangular lattice");
  std::vector<char> seen(samples.size(), 0);
  for (const auto& s : samples) {
    const auto i = static_cast<std::size_t>(std::llround((s.xi.x() - ax1.front()) / d1));
    const auto j = static_cast<std::size_t>(std::llround((s.xi.y() - ax2.front()) / d2));
    if (i >= ax1.size() || j >= ax2.size() || seen[i * ax2.size() + j]++)
      throw std::invalid_argument("frequency samples do not fill a rectangular lattice");
  }

  // zeta = -2 xi, so the zeta-cell is (2 d1) x (2 d2).
  const double weight = 4.0 * d1 * d2 / (4.0 * kPi * kPi);
  ComplexVector acc = ComplexVector::Zero(domain->num_nodes());
  for (const auto& s : samples) {
    for (Eigen::Index i = 0; i < acc.size(); ++i) {
      const double phase = -2.0 * s.xi.dot(domain->position(i));
      acc[i] += s.qhat * Complex(std::cos(phase), std::sin(phase));
    }
  }
  acc *= weight;
  return {RealField(domain, acc.real()), acc.imag().cwiseAbs().maxCoeff()};
}

Complex fourier_quadrature(const RealField& q, const Eigen::Vector2d& xi) {
  const DiscreteDomain& d = q.domain();
  Complex total = 0.0;
  for (Eigen::Index i = 0; i < d.num_nodes(); ++i) {
    const double phase = 2.0 * xi.dot(d.position(i));
    total += d.cell_weights()[i] * q[i] * Complex(std::cos(phase), std::sin(phase));
  }
  return total;
}

double relative_l2_error(const RealField& rec, const RealField& truth, double support_fraction) {
  require_same_domain(rec.domain(), truth.domain());
  const double threshold = support_fraction * truth.values().maxCoeff();
  const RealVector& w = truth.domain().cell_weights();
  double num = 0.0, den = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (truth[i] < threshold) continue;
    const double e = rec[i] - truth[i];
    num += w[i] * e * e;
    den += w[i] * truth[i] * truth[i];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

void write_samples_csv(std::ostream& out, const std::vector<FrequencySample>& samples) {
  out << "xi1,xi2,re_qhat,im_qhat,fd_step\n";
  out << std::setprecision(17);
  for (const auto& s : samples)
    out << s.xi.x() << ',' << s.xi.y() << ',' << s.qhat.real() << ',' << s.qhat.imag() << ','
        << s.fd_step << '\n';
}

std::vector<FrequencySample> read_samples_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("xi1,xi2", 0) != 0)
    throw std::invalid_argument("frequency sample CSV is missing its header");
  std::vector<FrequencySample> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(row, cell, ',')) v.push_back(std::stod(cell));
    if (v.size() != 5) throw std::invalid_argument("frequency sample CSV row needs 5 columns");
    FrequencySample s;
    s.xi = {v[0], v[1]};
    s.qhat = {v[2], v[3]};
    s.fd_step = v[4];
    out.push_back(s);
  }
  return out;
}

}  // namespace calderon
