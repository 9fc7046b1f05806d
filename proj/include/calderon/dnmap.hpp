// Dirichlet-to-Neumann map of the semilinear problem, its restriction to a
// boundary patch and its pairing with a boundary measure.

#ifndef CALDERON_DNMAP_HPP
#define CALDERON_DNMAP_HPP

#include <atomic>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "calderon/domain.hpp"
#include "calderon/elliptic.hpp"

namespace calderon {

// Contiguous run of boundary nodes. Indices are boundary-local (0..nb-1).
class BoundaryPatch {
 public:
  BoundaryPatch(DomainPtr domain, std::vector<Eigen::Index> members);

  static BoundaryPatch full(const DomainPtr& domain);
  // Nodes whose boundary parameter lies in the counterclockwise arc
  // [start, end] (wrapping around the perimeter if end < start).
  static BoundaryPatch arc(const DomainPtr& domain, double start, double end);

  const DiscreteDomain& domain() const { return *domain_; }
  const std::vector<Eigen::Index>& members() const { return members_; }
  bool contains(Eigen::Index j) const { return mask_[j] != 0; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(members_.size()); }
  // Zeroes `g` outside the patch.
  BoundaryField restrict_support(const BoundaryField& g) const;

 private:
  DomainPtr domain_;
  std::vector<Eigen::Index> members_;
  std::vector<char> mask_;
};

struct MeasureAtom {
  Eigen::Index node = 0;  // boundary-local index
  Complex weight{1.0, 0.0};
  // Distance from the requested location to the node it snapped to.
  double snap_distance = 0.0;
};

// Finite measure on the boundary: Dirac atoms plus an optional density
// against the boundary quadrature weights.
class BoundaryMeasure {
 public:
  explicit BoundaryMeasure(DomainPtr domain) : domain_(std::move(domain)) {}

  static BoundaryMeasure dirac(const DomainPtr& domain, double parameter, Complex weight = 1.0);
  static BoundaryMeasure uniform(const DomainPtr& domain, double density = 1.0);
  // {"atoms": [{"theta" | "s": value, "weight": w | [re, im]}, ...],
  //  "density": number | [[parameter, value], ...]}
  static BoundaryMeasure from_json(const DomainPtr& domain, const nlohmann::json& spec);

  void add_atom(double parameter, Complex weight);
  void set_density(BoundaryField density);

  const DiscreteDomain& domain() const { return *domain_; }
  const DomainPtr& domain_ptr() const { return domain_; }
  const std::vector<MeasureAtom>& atoms() const { return atoms_; }
  const std::optional<BoundaryField>& density() const { return density_; }

  double total_variation() const;
  bool is_nonnegative() const;
  // sum_atoms w g(node) + sum_j density_j boundary_weight_j g_j
  Complex pair(const BoundaryField& g) const;

  nlohmann::json metadata() const;

 private:
  DomainPtr domain_;
  std::vector<MeasureAtom> atoms_;
  std::optional<BoundaryField> density_;
};

// Boundary-data-only view of the forward problem: holds q and exposes only the
// map f -> d_nu u_f. Inverse routines receive this object, never q.
class DnMap {
 public:
  DnMap(RealField q, int m, SolverConfig cfg = {});
  DnMap(const DnMap& other);

  const DomainPtr& domain_ptr() const { return q_.domain_ptr(); }
  const DiscreteDomain& domain() const { return q_.domain(); }
  int power() const { return m_; }
  const SolverConfig& config() const { return cfg_; }

  BoundaryField apply(const BoundaryField& f) const;
  long long solve_count() const { return solves_.load(); }

 private:
  RealField q_;
  int m_;
  SolverConfig cfg_;
  mutable std::atomic<long long> solves_{0};
};

BoundaryField dn_apply(const RealField& q, int m, const BoundaryField& f, const SolverConfig& cfg);

struct PatchTrace {
  BoundaryPatch patch;
  ComplexVector values;  // aligned with patch.members()
};

// Throws std::invalid_argument if f is nonzero outside the patch.
PatchTrace dn_partial(const RealField& q, int m, const BoundaryField& f, const BoundaryPatch& patch,
                      const SolverConfig& cfg);

Complex dn_measure_pair(const RealField& q, int m, const BoundaryField& f,
                        const BoundaryMeasure& mu, const SolverConfig& cfg);

}  // namespace calderon

#endif  // CALDERON_DNMAP_HPP
