// Discretized two-dimensional domains and the fields that live on them.
//
// Nodes are numbered interior first, then boundary nodes in counterclockwise
// order, so that for any nodal vector `v` the interior block is
// `v.head(num_interior())` and the boundary trace is `v.tail(num_boundary())`.

#ifndef CALDERON_DOMAIN_HPP
#define CALDERON_DOMAIN_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace calderon {

using Complex = std::complex<double>;
using RealVector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Point = Eigen::Vector2d;

enum class Shape { square, disk };

std::string to_string(Shape shape);
Shape shape_from_string(const std::string& name);

class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// One lattice cell [c - h/2, c + h/2]^2 clipped to the domain, together with
// the node that carries its quadrature mass.
struct QuadratureCell {
  Point center;
  double area = 0.0;
  Eigen::Index owner = 0;
};

class DiscreteDomain {
 public:
  // Unit square [0,1]^2 or unit disk |x| < 1 embedded in an N x N lattice.
  // Throws DomainError for resolution < 8.
  DiscreteDomain(Shape shape, int resolution);

  DiscreteDomain(const DiscreteDomain&) = delete;
  DiscreteDomain& operator=(const DiscreteDomain&) = delete;

  Shape shape() const { return shape_; }
  int resolution() const { return resolution_; }
  double h() const { return h_; }

  Eigen::Index num_nodes() const { return positions_.cols(); }
  Eigen::Index num_interior() const { return num_interior_; }
  Eigen::Index num_boundary() const { return num_nodes() - num_interior_; }

  // Global node index of the j-th boundary node.
  Eigen::Index boundary_node(Eigen::Index j) const { return num_interior_ + j; }
  bool is_boundary(Eigen::Index node) const { return node >= num_interior_; }

  // 2 x num_nodes.
  const Eigen::Matrix2Xd& positions() const { return positions_; }
  Point position(Eigen::Index node) const { return positions_.col(node); }

  // Per boundary node, in counterclockwise order.
  const Eigen::Matrix2Xd& normals() const { return normals_; }
  const RealVector& boundary_weights() const { return boundary_weights_; }
  // Arc-length position along the boundary: the polar angle on the disk,
  // distance from the origin corner going counterclockwise on the square.
  const RealVector& boundary_parameter() const { return boundary_parameter_; }
  double perimeter() const;
  double area() const;

  // Volume quadrature weight of every node (boundary nodes carry the mass of
  // the clipped cells next to them).
  const RealVector& cell_weights() const { return cell_weights_; }
  const std::vector<QuadratureCell>& quadrature_cells() const { return cells_; }

  // Discrete Laplacian rows for interior nodes: num_interior x num_nodes.
  const SparseMatrix& laplacian() const { return laplacian_; }
  // Normal derivative stencils: num_boundary x num_nodes.
  const SparseMatrix& normal_stencil() const { return normal_stencil_; }

  // Sparse LU of the interior block of laplacian(), built on first use and
  // shared read-only afterwards.
  const Eigen::SparseLU<SparseMatrix>& dirichlet_factorization() const;

  // Boundary index nearest to `x`, by Euclidean distance.
  Eigen::Index nearest_boundary(const Point& x) const;
  // Boundary index whose boundary_parameter is closest (periodically) to `s`.
  Eigen::Index boundary_index_at(double s) const;
  Point boundary_point_at(double s) const;

  // Distance from a point inside the closed domain to the boundary curve.
  double distance_to_boundary(const Point& x) const;
  bool contains(const Point& x) const;

 private:
  void build_square();
  void build_disk();
  void build_disk_normal_stencils(const std::vector<Point>& nodes);

  Shape shape_;
  int resolution_;
  double h_;
  Eigen::Index num_interior_ = 0;
  Eigen::Matrix2Xd positions_;
  Eigen::Matrix2Xd normals_;
  RealVector boundary_weights_;
  RealVector boundary_parameter_;
  RealVector cell_weights_;
  std::vector<QuadratureCell> cells_;
  SparseMatrix laplacian_;
  SparseMatrix normal_stencil_;

  mutable std::once_flag factor_once_;
  mutable std::unique_ptr<Eigen::SparseLU<SparseMatrix>> factorization_;
};

using DomainPtr = std::shared_ptr<const DiscreteDomain>;

DomainPtr build_domain(Shape shape, int resolution);

// Area of the axis-aligned rectangle [x0,x1] x [y0,y1] intersected with the
// unit disk, in closed form.
double rectangle_disk_area(double x0, double x1, double y0, double y1);

// Nodal field on all nodes of a domain.
template <typename Scalar>
class GridFunction {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  explicit GridFunction(DomainPtr domain)
      : domain_(std::move(domain)), values_(Vector::Zero(domain_->num_nodes())) {}

  GridFunction(DomainPtr domain, Vector values)
      : domain_(std::move(domain)), values_(std::move(values)) {
    if (values_.size() != domain_->num_nodes())
      throw DomainError("grid function size does not match node count");
  }

  const DiscreteDomain& domain() const { return *domain_; }
  const DomainPtr& domain_ptr() const { return domain_; }

  const Vector& values() const { return values_; }
  Vector& values() { return values_; }

  auto interior() const { return values_.head(domain_->num_interior()); }
  auto interior() { return values_.head(domain_->num_interior()); }
  auto boundary() const { return values_.tail(domain_->num_boundary()); }
  auto boundary() { return values_.tail(domain_->num_boundary()); }

  Scalar operator[](Eigen::Index node) const { return values_[node]; }

 private:
  DomainPtr domain_;
  Vector values_;
};

// Field on the boundary nodes only (Dirichlet data, DN traces).
template <typename Scalar>
class BoundaryFunction {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  explicit BoundaryFunction(DomainPtr domain)
      : domain_(std::move(domain)), values_(Vector::Zero(domain_->num_boundary())) {}

  BoundaryFunction(DomainPtr domain, Vector values)
      : domain_(std::move(domain)), values_(std::move(values)) {
    if (values_.size() != domain_->num_boundary())
      throw DomainError("boundary function size does not match boundary node count");
  }

  const DiscreteDomain& domain() const { return *domain_; }
  const DomainPtr& domain_ptr() const { return domain_; }

  const Vector& values() const { return values_; }
  Vector& values() { return values_; }

  Scalar operator[](Eigen::Index j) const { return values_[j]; }

 private:
  DomainPtr domain_;
  Vector values_;
};

using Field = GridFunction<Complex>;
using RealField = GridFunction<double>;
using BoundaryField = BoundaryFunction<Complex>;
using RealBoundaryField = BoundaryFunction<double>;

void require_same_domain(const DiscreteDomain& a, const DiscreteDomain& b);

template <typename Scalar, typename Fn>
GridFunction<Scalar> sample(const DomainPtr& domain, Fn&& fn) {
  typename GridFunction<Scalar>::Vector v(domain->num_nodes());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = fn(domain->position(i));
  return GridFunction<Scalar>(domain, std::move(v));
}

template <typename Scalar, typename Fn>
BoundaryFunction<Scalar> sample_boundary(const DomainPtr& domain, Fn&& fn) {
  typename BoundaryFunction<Scalar>::Vector v(domain->num_boundary());
  for (Eigen::Index j = 0; j < v.size(); ++j)
    v[j] = fn(domain->position(domain->boundary_node(j)));
  return BoundaryFunction<Scalar>(domain, std::move(v));
}

template <typename Scalar>
BoundaryFunction<Scalar> trace(const GridFunction<Scalar>& u) {
  return BoundaryFunction<Scalar>(u.domain_ptr(), u.boundary());
}

inline Field complexify(const RealField& u) {
  return Field(u.domain_ptr(), u.values().template cast<Complex>());
}

inline BoundaryField complexify(const RealBoundaryField& g) {
  return BoundaryField(g.domain_ptr(), g.values().template cast<Complex>());
}

// Second-order one-sided derivative along the outward normal. On square
// corners the result is the mean of the two edge-normal derivatives, which is
// the value the trapezoidal boundary rule needs.
template <typename Scalar>
BoundaryFunction<Scalar> normal_derivative(const GridFunction<Scalar>& u) {
  const SparseMatrix& d = u.domain().normal_stencil();
  typename BoundaryFunction<Scalar>::Vector out = d * u.values();
  return BoundaryFunction<Scalar>(u.domain_ptr(), std::move(out));
}

// (sum cell_weights |u|^p)^(1/p); p = infinity gives the max over interior
// nodes.
template <typename Scalar>
double lp_norm(const GridFunction<Scalar>& u, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm requires p >= 1");
  if (std::isinf(p)) {
    if (u.domain().num_interior() == 0) return 0.0;
    return u.interior().cwiseAbs().maxCoeff();
  }
  const RealVector& w = u.domain().cell_weights();
  const double s = (w.array() * u.values().cwiseAbs().array().pow(p)).sum();
  return std::pow(s, 1.0 / p);
}

template <typename Scalar>
Scalar integrate(const GridFunction<Scalar>& u) {
  return (u.domain().cell_weights().template cast<Scalar>().array() * u.values().array()).sum();
}

template <typename Scalar>
Scalar integrate_boundary(const BoundaryFunction<Scalar>& g) {
  return (g.domain().boundary_weights().template cast<Scalar>().array() * g.values().array()).sum();
}

template <typename Scalar>
double sup_norm(const BoundaryFunction<Scalar>& g) {
  return g.values().size() == 0 ? 0.0 : g.values().cwiseAbs().maxCoeff();
}

template <typename Scalar>
double sup_norm(const GridFunction<Scalar>& u) {
  return u.values().size() == 0 ? 0.0 : u.values().cwiseAbs().maxCoeff();
}

}  // namespace calderon

#endif  // CALDERON_DOMAIN_HPP
