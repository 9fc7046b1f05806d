#include "calderon/dnmap.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace calderon {

namespace {

Complex parse_weight(const nlohmann::json& w) {
  if (w.is_number()) return {w.get<double>(), 0.0};
  if (w.is_array() && w.size() == 2) return {w[0].get<double>(), w[1].get<double>()};
  throw std::invalid_argument("measure weight must be a number or [re, im]");
}

}  // namespace

BoundaryPatch::BoundaryPatch(DomainPtr domain, std::vector<Eigen::Index> members)
    : domain_(std::move(domain)), members_(std::move(members)),
      mask_(static_cast<std::size_t>(domain_->num_boundary()), 0) {
  if (members_.empty()) throw std::invalid_argument("boundary patch must be nonempty");
  for (Eigen::Index j : members_) {
    if (j < 0 || j >= domain_->num_boundary())
      throw std::invalid_argument("patch member is not a boundary node");
    mask_[j] = 1;
  }
}

BoundaryPatch BoundaryPatch::full(const DomainPtr& domain) {
  std::vector<Eigen::Index> all(domain->num_boundary());
  for (Eigen::Index j = 0; j < domain->num_boundary(); ++j) all[j] = j;
  return BoundaryPatch(domain, std::move(all));
}

BoundaryPatch BoundaryPatch::arc(const DomainPtr& domain, double start, double end) {
  const double period = domain->perimeter();
  const auto wrap = [period](double s) {
    s = std::fmod(s, period);
    return s < 0.0 ? s + period : s;
  };
  const double a = wrap(start);
  double length = wrap(end) - a;
  if (length < 0.0) length += period;
  if (end - start >= period) length = period;
  constexpr double eps = 1e-12;

  // Start the run at the first node of the arc so members stay contiguous.
  std::vector<Eigen::Index> members;
  const RealVector& s = domain->boundary_parameter();
  const Eigen::Index nb = domain->num_boundary();
  Eigen::Index first = 0;
  double best = period;
  for (Eigen::Index j = 0; j < nb; ++j) {
    double offset = s[j] - a;
    if (offset < -eps) offset += period;
    if (offset <= length + eps && offset < best) {
      best = offset;
      first = j;
    }
  }
  for (Eigen::Index k = 0; k < nb; ++k) {
    const Eigen::Index j = (first + k) % nb;
    double offset = s[j] - a;
    if (offset < -eps) offset += period;
    if (offset <= length + eps) members.push_back(j);
  }
  return BoundaryPatch(domain, std::move(members));
}

BoundaryField BoundaryPatch::restrict_support(const BoundaryField& g) const {
  require_same_domain(g.domain(), *domain_);
  BoundaryField out(domain_);
  for (Eigen::Index j : members_) out.values()[j] = g[j];
  return out;
}

BoundaryMeasure BoundaryMeasure::dirac(const DomainPtr& domain, double parameter, Complex weight) {
  BoundaryMeasure mu(domain);
  mu.add_atom(parameter, weight);
  return mu;
}

BoundaryMeasure BoundaryMeasure::uniform(const DomainPtr& domain, double density) {
  BoundaryMeasure mu(domain);
  mu.set_density(BoundaryField(domain, ComplexVector::Constant(domain->num_boundary(), density)));
  return mu;
}

void BoundaryMeasure::add_atom(double parameter, Complex weight) {
  const Point target = domain_->boundary_point_at(parameter);
  const Eigen::Index j = domain_->nearest_boundary(target);
  const double snap = (domain_->position(domain_->boundary_node(j)) - target).norm();
  atoms_.push_back({j, weight, snap});
}

void BoundaryMeasure::set_density(BoundaryField density) {
  require_same_domain(density.domain(), *domain_);
  density_ = std::move(density);
}

BoundaryMeasure BoundaryMeasure::from_json(const DomainPtr& domain, const nlohmann::json& spec) {
  BoundaryMeasure mu(domain);
  if (!spec.is_object()) throw std::invalid_argument("measure spec must be an object");
  if (spec.contains("atoms")) {
    for (const auto& atom : spec.at("atoms")) {
      double where = 0.0;
      if (atom.contains("theta"))
        where = atom.at("theta").get<double>();
      else if (atom.contains("s"))
        where = atom.at("s").get<double>();
      else
        throw std::invalid_argument("measure atom needs 'theta' or 's'");
      mu.add_atom(where, atom.contains("weight") ? parse_weight(atom.at("weight")) : Complex(1.0));
    }
  }
  if (spec.contains("density")) {
    const auto& d = spec.at("density");
    if (d.is_number()) {
      mu.set_density(
          BoundaryField(domain, ComplexVector::Constant(domain->num_boundary(), d.get<double>())));
    } else if (d.is_array() && !d.empty()) {
      // Periodic piecewise-linear interpolation of (parameter, value) samples.
      std::vector<std::pair<double, double>> samples;
      for (const auto& s : d) samples.emplace_back(s.at(0).get<double>(), s.at(1).get<double>());
      std::sort(samples.begin(), samples.end());
      const double period = domain->perimeter();
      ComplexVector values(domain->num_boundary());
      for (Eigen::Index j = 0; j < values.size(); ++j) {
        const double t = domain->boundary_parameter()[j];
        auto hi = std::upper_bound(samples.begin(), samples.end(), std::make_pair(t, 1e300));
        const auto& right = hi == samples.end() ? samples.front() : *hi;
        const auto& left = hi == samples.begin() ? samples.back() : *std::prev(hi);
        double span = right.first - left.first;
        double off = t - left.first;
        if (span <= 0.0) span += period;
        if (off < 0.0) off += period;
        const double lambda = span > 0.0 ? off / span : 0.0;
        values[j] = (1.0 - lambda) * left.second + lambda * right.second;
      }
      mu.set_density(BoundaryField(domain, std::move(values)));
    } else {
      throw std::invalid_argument("measure density must be a number or a list of samples");
    }
  }
  if (mu.total_variation() <= 0.0) throw std::invalid_argument("measure is identically zero");
  return mu;
}

double BoundaryMeasure::total_variation() const {
  double tv = 0.0;
  for (const auto& a : atoms_) tv += std::abs(a.weight);
  if (density_)
    tv += (domain_->boundary_weights().array() * density_->values().cwiseAbs().array()).sum();
  return tv;
}

bool BoundaryMeasure::is_nonnegative() const {
  for (const auto& a : atoms_)
    if (a.weight.real() < 0.0 || a.weight.imag() != 0.0) return false;
  if (density_)
    for (Eigen::Index j = 0; j < density_->values().size(); ++j)
      if ((*density_)[j].real() < 0.0 || (*density_)[j].imag() != 0.0) return false;
  return true;
}

Complex BoundaryMeasure::pair(const BoundaryField& g) const {
  require_same_domain(g.domain(), *domain_);
  Complex total = 0.0;
  for (const auto& a : atoms_) total += a.weight * g[a.node];
  if (density_)
    total += (domain_->boundary_weights().cast<Complex>().array() * density_->values().array() *
              g.values().array())
                 .sum();
  return total;
}

nlohmann::json BoundaryMeasure::metadata() const {
  nlohmann::json atoms = nlohmann::json::array();
  for (const auto& a : atoms_) {
    atoms.push_back({{"node", domain_->boundary_node(a.node)},
                     {"parameter", domain_->boundary_parameter()[a.node]},
                     {"weight", {a.weight.real(), a.weight.imag()}},
                     {"snap_distance", a.snap_distance}});
  }
  return {{"atoms", atoms}, {"has_density", density_.has_value()},
          {"total_variation", total_variation()}};
}

DnMap::DnMap(RealField q, int m, SolverConfig cfg) : q_(std::move(q)), m_(m), cfg_(cfg) {
  if (m_ < 2) throw std::invalid_argument("semilinear power m must be at least 2");
  cfg_.validate();
}

DnMap::DnMap(const DnMap& other) : q_(other.q_), m_(other.m_), cfg_(other.cfg_) {}

BoundaryField DnMap::apply(const BoundaryField& f) const {
  solves_.fetch_add(1, std::memory_order_relaxed);
  const SemilinearSolution sol = solve_semilinear({q_, m_, f}, cfg_);
  return normal_derivative(sol.u);
}

BoundaryField dn_apply(const RealField& q, int m, const BoundaryField& f, const SolverConfig& cfg) {
  return DnMap(q, m, cfg).apply(f);
}

PatchTrace dn_partial(const RealField& q, int m, const BoundaryField& f, const BoundaryPatch& patch,
                      const SolverConfig& cfg) {
  require_same_domain(f.domain(), patch.domain());
  for (Eigen::Index j = 0; j < f.values().size(); ++j)
    if (!patch.contains(j) && f[j] != Complex(0.0))
      throw std::invalid_argument("boundary data is not supported in the patch");
  const BoundaryField full = dn_apply(q, m, f, cfg);
  ComplexVector values(patch.size());
  for (Eigen::Index k = 0; k < patch.size(); ++k) values[k] = full[patch.members()[k]];
  return {patch, std::move(values)};
}

Complex dn_measure_pair(const RealField& q, int m, const BoundaryField& f,
                        const BoundaryMeasure& mu, const SolverConfig& cfg) {
  return mu.pair(dn_apply(q, m, f, cfg));
}

}  // namespace calderon
