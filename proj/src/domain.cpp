#include "calderon/domain.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include <Eigen/QR>

namespace calderon {

namespace {

constexpr double kPi = std::numbers::pi;

// Antiderivative of sqrt(1 - x^2).
double half_chord_integral(double x) {
  x = std::clamp(x, -1.0, 1.0);
  return 0.5 * (x * std::sqrt(1.0 - x * x) + std::asin(x));
}

struct Arm {
  Eigen::Index node = -1;
  double length = 0.0;
};

void add_shortley_weller_row(std::vector<Eigen::Triplet<double>>& t, Eigen::Index row,
                             Eigen::Index self, const Arm& minus, const Arm& plus) {
  const double a = minus.length;
  const double b = plus.length;
  t.emplace_back(row, minus.node, 2.0 / (a * (a + b)));
  t.emplace_back(row, plus.node, 2.0 / (b * (a + b)));
  t.emplace_back(row, self, -2.0 / (a * b));
}

}  // namespace

std::string to_string(Shape shape) { return shape == Shape::square ? "square" : "disk"; }

Shape shape_from_string(const std::string& name) {
  if (name == "square") return Shape::square;
  if (name == "disk") return Shape::disk;
  throw DomainError("unknown domain shape '" + name + "'");
}

void require_same_domain(const DiscreteDomain& a, const DiscreteDomain& b) {
  if (&a != &b) throw DomainError("fields live on different domains");
}

double rectangle_disk_area(double x0, double x1, double y0, double y1) {
  const double lo = std::max(x0, -1.0);
  const double hi = std::min(x1, 1.0);
  if (!(hi > lo) || !(y1 > y0)) return 0.0;

  std::vector<double> breaks{lo, hi};
  for (double y : {y0, y1}) {
    if (std::abs(y) < 1.0) {
      const double xb = std::sqrt(1.0 - y * y);
      for (double c : {-xb, xb})
        if (c > lo && c < hi) breaks.push_back(c);
    }
  }
  std::sort(breaks.begin(), breaks.end());

  double area = 0.0;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double a = breaks[k];
    const double b = breaks[k + 1];
    if (!(b > a)) continue;
    const double mid = 0.5 * (a + b);
    const double s = std::sqrt(std::max(0.0, 1.0 - mid * mid));
    const bool top_is_circle = s <= y1;
    const bool bottom_is_circle = -s >= y0;
    const double top = top_is_circle ? s : y1;
    const double bottom = bottom_is_circle ? -s : y0;
    if (top <= bottom) continue;
    const double chord = half_chord_integral(b) - half_chord_integral(a);
    area += top_is_circle ? chord : y1 * (b - a);
    area -= bottom_is_circle ? -chord : y0 * (b - a);
  }
  return area;
}

DiscreteDomain::DiscreteDomain(Shape shape, int resolution)
    : shape_(shape), resolution_(resolution) {
  if (resolution < 8)
    throw DomainError("resolution must be at least 8 nodes per side, got " +
                      std::to_string(resolution));
  if (shape == Shape::square)
    build_square();
  else
    build_disk();
}

double DiscreteDomain::perimeter() const { return shape_ == Shape::square ? 4.0 : 2.0 * kPi; }

double DiscreteDomain::area() const { return shape_ == Shape::square ? 1.0 : kPi; }

void DiscreteDomain::build_square() {
  const int n = resolution_;
  h_ = 1.0 / (n - 1);
  const auto lattice = [n](int i, int j) { return i + n * j; };

  std::vector<Eigen::Index> index(static_cast<std::size_t>(n) * n, -1);
  Eigen::Index next = 0;
  for (int j = 1; j < n - 1; ++j)
    for (int i = 1; i < n - 1; ++i) index[lattice(i, j)] = next++;
  num_interior_ = next;

  // Counterclockwise from the origin corner.
  std::vector<std::pair<int, int>> ring;
  for (int i = 0; i < n; ++i) ring.emplace_back(i, 0);
  for (int j = 1; j < n; ++j) ring.emplace_back(n - 1, j);
  for (int i = n - 2; i >= 0; --i) ring.emplace_back(i, n - 1);
  for (int j = n - 2; j >= 1; --j) ring.emplace_back(0, j);
  for (const auto& [i, j] : ring) index[lattice(i, j)] = next++;

  const Eigen::Index total = next;
  const Eigen::Index nb = total - num_interior_;
  positions_.resize(2, total);
  cell_weights_.resize(total);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const Eigen::Index k = index[lattice(i, j)];
      positions_.col(k) << i * h_, j * h_;
      const double wi = (i == 0 || i == n - 1) ? 0.5 * h_ : h_;
      const double wj = (j == 0 || j == n - 1) ? 0.5 * h_ : h_;
      cell_weights_[k] = wi * wj;
      cells_.push_back({positions_.col(k), wi * wj, k});
    }
  }

  normals_.resize(2, nb);
  boundary_weights_ = RealVector::Constant(nb, h_);
  boundary_parameter_.resize(nb);
  std::vector<Eigen::Triplet<double>> dn;
  const double inv2h = 1.0 / (2.0 * h_);
  // One-sided stencil along the edge normal (di, dj) at lattice node (i, j).
  const auto one_sided = [&](Eigen::Index row, int i, int j, int di, int dj, double scale) {
    dn.emplace_back(row, index[lattice(i, j)], 3.0 * inv2h * scale);
    dn.emplace_back(row, index[lattice(i - di, j - dj)], -4.0 * inv2h * scale);
    dn.emplace_back(row, index[lattice(i - 2 * di, j - 2 * dj)], inv2h * scale);
  };
  for (Eigen::Index b = 0; b < nb; ++b) {
    const auto [i, j] = ring[b];
    std::vector<std::pair<int, int>> edge_normals;
    if (j == 0) edge_normals.emplace_back(0, -1);
    if (i == n - 1) edge_normals.emplace_back(1, 0);
    if (j == n - 1) edge_normals.emplace_back(0, 1);
    if (i == 0) edge_normals.emplace_back(-1, 0);
    Eigen::Vector2d nu = Eigen::Vector2d::Zero();
    const double scale = 1.0 / static_cast<double>(edge_normals.size());
    for (const auto& [di, dj] : edge_normals) {
      nu += Eigen::Vector2d(di, dj);
      one_sided(b, i, j, di, dj, scale);
    }
    normals_.col(b) = nu.normalized();

    double s = 0.0;
    if (j == 0)
      s = i * h_;
    else if (i == n - 1)
      s = 1.0 + j * h_;
    else if (j == n - 1)
      s = 2.0 + (n - 1 - i) * h_;
    else
      s = 3.0 + (n - 1 - j) * h_;
    boundary_parameter_[b] = s;
  }
  normal_stencil_.resize(nb, total);
  normal_stencil_.setFromTriplets(dn.begin(), dn.end());

  std::vector<Eigen::Triplet<double>> lap;
  const double inv_h2 = 1.0 / (h_ * h_);
  for (int j = 1; j < n - 1; ++j) {
    for (int i = 1; i < n - 1; ++i) {
      const Eigen::Index row = index[lattice(i, j)];
      lap.emplace_back(row, row, -4.0 * inv_h2);
      lap.emplace_back(row, index[lattice(i - 1, j)], inv_h2);
      lap.emplace_back(row, index[lattice(i + 1, j)], inv_h2);
      lap.emplace_back(row, index[lattice(i, j - 1)], inv_h2);
      lap.emplace_back(row, index[lattice(i, j + 1)], inv_h2);
    }
  }
  laplacian_.resize(num_interior_, total);
  laplacian_.setFromTriplets(lap.begin(), lap.end());
}

void DiscreteDomain::build_disk() {
  const int n = resolution_;
  h_ = 2.0 / (n - 1);
  const auto lattice = [n](int i, int j) { return i + n * j; };
  const auto coord = [this](int i) { return -1.0 + i * h_; };
  const double on_circle_tol = 1e-12;

  enum class Kind { inside, on_circle, outside };
  std::vector<Kind> kind(static_cast<std::size_t>(n) * n);
  std::vector<Eigen::Index> index(kind.size(), -1);
  Eigen::Index next = 0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double r = std::hypot(coord(i), coord(j));
      Kind k = Kind::outside;
      if (std::abs(r - 1.0) <= on_circle_tol)
        k = Kind::on_circle;
      else if (r < 1.0)
        k = Kind::inside;
      kind[lattice(i, j)] = k;
      if (k == Kind::inside) index[lattice(i, j)] = next++;
    }
  }
  num_interior_ = next;

  // Boundary points: lattice points on the circle plus the crossings of
  // lattice segments leaving the disk. Temporary ids are replaced by the
  // counterclockwise order below.
  std::vector<Point> boundary_points;
  std::map<int, Eigen::Index> on_circle_id;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (kind[lattice(i, j)] == Kind::on_circle) {
        on_circle_id[lattice(i, j)] = static_cast<Eigen::Index>(boundary_points.size());
        boundary_points.push_back(Point(coord(i), coord(j)).normalized());
      }

  struct PendingArm {
    int axis;  // 0: x, 1: y
    int sign;
    Eigen::Index boundary_id;  // temporary id, or -1 for an interior neighbour
    Eigen::Index node;         // interior neighbour
    double length;
  };
  std::vector<std::array<PendingArm, 4>> arms(num_interior_);
  const int di[4] = {-1, 1, 0, 0};
  const int dj[4] = {0, 0, -1, 1};
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (kind[lattice(i, j)] != Kind::inside) continue;
      const Eigen::Index self = index[lattice(i, j)];
      const Point p(coord(i), coord(j));
      for (int d = 0; d < 4; ++d) {
        const int ni = i + di[d];
        const int nj = j + dj[d];
        PendingArm arm{d < 2 ? 0 : 1, d % 2 == 0 ? -1 : 1, -1, -1, h_};
        const Kind nk = kind[lattice(ni, nj)];
        if (nk == Kind::inside) {
          arm.node = index[lattice(ni, nj)];
        } else if (nk == Kind::on_circle) {
          arm.boundary_id = on_circle_id.at(lattice(ni, nj));
        } else {
          const Point dir(di[d], dj[d]);
          const double pd = p.dot(dir);
          const double t = -pd + std::sqrt(pd * pd - (p.squaredNorm() - 1.0));
          arm.length = t;
          arm.boundary_id = static_cast<Eigen::Index>(boundary_points.size());
          boundary_points.push_back((p + t * dir).normalized());
        }
        arms[self][d] = arm;
      }
    }
  }

  const Eigen::Index nb = static_cast<Eigen::Index>(boundary_points.size());
  std::vector<double> angle(nb);
  for (Eigen::Index k = 0; k < nb; ++k) {
    double a = std::atan2(boundary_points[k].y(), boundary_points[k].x());
    if (a < 0.0) a += 2.0 * kPi;
    angle[k] = a;
  }
  std::vector<Eigen::Index> order(nb);
  for (Eigen::Index k = 0; k < nb; ++k) order[k] = k;
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return angle[a] < angle[b]; });
  std::vector<Eigen::Index> rank(nb);
  for (Eigen::Index r = 0; r < nb; ++r) rank[order[r]] = r;

  const Eigen::Index total = num_interior_ + nb;
  positions_.resize(2, total);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (kind[lattice(i, j)] == Kind::inside)
        positions_.col(index[lattice(i, j)]) << coord(i), coord(j);
  normals_.resize(2, nb);
  boundary_parameter_.resize(nb);
  for (Eigen::Index r = 0; r < nb; ++r) {
    const Point& y = boundary_points[order[r]];
    positions_.col(num_interior_ + r) = y;
    normals_.col(r) = y;
    boundary_parameter_[r] = angle[order[r]];
  }
  for (auto& [lat, id] : on_circle_id) index[lat] = num_interior_ + rank[id];

  boundary_weights_.resize(nb);
  for (Eigen::Index r = 0; r < nb; ++r) {
    const double prev = boundary_parameter_[(r + nb - 1) % nb];
    const double next_angle = boundary_parameter_[(r + 1) % nb];
    double before = boundary_parameter_[r] - prev;
    double after = next_angle - boundary_parameter_[r];
    if (before <= 0.0) before += 2.0 * kPi;
    if (after <= 0.0) after += 2.0 * kPi;
    boundary_weights_[r] = 0.5 * (before + after);
  }

  std::vector<Eigen::Triplet<double>> lap;
  for (Eigen::Index row = 0; row < num_interior_; ++row) {
    for (int axis = 0; axis < 2; ++axis) {
      Arm minus, plus;
      for (const PendingArm& a : arms[row]) {
        if (a.axis != axis) continue;
        Arm arm{a.boundary_id >= 0 ? num_interior_ + rank[a.boundary_id] : a.node, a.length};
        (a.sign < 0 ? minus : plus) = arm;
      }
      add_shortley_weller_row(lap, row, row, minus, plus);
    }
  }
  laplacian_.resize(num_interior_, total);
  laplacian_.setFromTriplets(lap.begin(), lap.end());

  // Clipped dual cells; mass outside the lattice nodes goes to the nearest
  // boundary node.
  cell_weights_ = RealVector::Zero(total);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double x = coord(i);
      const double y = coord(j);
      const double a = rectangle_disk_area(x - 0.5 * h_, x + 0.5 * h_, y - 0.5 * h_, y + 0.5 * h_);
      if (a <= 0.0) continue;
      const Point c(x, y);
      const Eigen::Index owner =
          kind[lattice(i, j)] == Kind::outside ? boundary_node(nearest_boundary(c))
                                               : index[lattice(i, j)];
      cell_weights_[owner] += a;
      cells_.push_back({c, a, owner});
    }
  }

  std::vector<Point> nodes(total);
  for (Eigen::Index k = 0; k < total; ++k) nodes[k] = positions_.col(k);
  build_disk_normal_stencils(nodes);
}

// Weighted least-squares cubic fit around each boundary node; the stencil row
// is the fitted gradient dotted with the normal.
void DiscreteDomain::build_disk_normal_stencils(const std::vector<Point>& nodes) {
  const Eigen::Index nb = num_boundary();
  std::vector<Eigen::Triplet<double>> dn;
  for (Eigen::Index b = 0; b < nb; ++b) {
    const Eigen::Index self = boundary_node(b);
    const Point y = nodes[self];
    const Eigen::Vector2d nu = normals_.col(b);
    for (double radius = 3.0;; radius += 0.5) {
      std::vector<Eigen::Index> near;
      for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(nodes.size()); ++k)
        if ((nodes[k] - y).norm() <= radius * h_) near.push_back(k);
      const Eigen::Index count = static_cast<Eigen::Index>(near.size());
      if (count < 14) continue;
      Eigen::MatrixXd basis(count, 10);
      Eigen::VectorXd weight(count);
      for (Eigen::Index r = 0; r < count; ++r) {
        const Eigen::Vector2d d = (nodes[near[r]] - y) / h_;
        const double u = d.x();
        const double v = d.y();
        basis.row(r) << 1.0, u, v, u * u, u * v, v * v, u * u * u, u * u * v, u * v * v, v * v * v;
        weight[r] = near[r] == self ? 10.0 : std::exp(-0.25 * d.squaredNorm());
      }
      const Eigen::MatrixXd weighted = weight.asDiagonal() * basis;
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(weighted);
      if (cod.rank() < 10) {
        if (radius > 6.0) throw DomainError("degenerate boundary stencil on disk");
        continue;
      }
      const Eigen::MatrixXd pinv = cod.pseudoInverse();
      const Eigen::RowVectorXd row =
          (nu.x() * pinv.row(1) + nu.y() * pinv.row(2)).cwiseProduct(weight.transpose()) / h_;
      for (Eigen::Index r = 0; r < count; ++r) dn.emplace_back(b, near[r], row[r]);
      break;
    }
  }
  normal_stencil_.resize(nb, num_nodes());
  normal_stencil_.setFromTriplets(dn.begin(), dn.end());
}

const Eigen::SparseLU<SparseMatrix>& DiscreteDomain::dirichlet_factorization() const {
  std::call_once(factor_once_, [this] {
    SparseMatrix interior = laplacian_.leftCols(num_interior_);
    interior.makeCompressed();
    auto lu = std::make_unique<Eigen::SparseLU<SparseMatrix>>();
    lu->analyzePattern(interior);
    lu->factorize(interior);
    if (lu->info() != Eigen::Success)
      throw std::runtime_error("Dirichlet Laplacian factorization failed: " + lu->lastErrorMessage());
    factorization_ = std::move(lu);
  });
  return *factorization_;
}

Eigen::Index DiscreteDomain::nearest_boundary(const Point& x) const {
  Eigen::Index best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < num_boundary(); ++j) {
    const double d = (positions_.col(boundary_node(j)) - x).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

Eigen::Index DiscreteDomain::boundary_index_at(double s) const {
  const double period = perimeter();
  s = std::fmod(s, period);
  if (s < 0.0) s += period;
  Eigen::Index best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < num_boundary(); ++j) {
    double d = std::abs(boundary_parameter_[j] - s);
    d = std::min(d, period - d);
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

Point DiscreteDomain::boundary_point_at(double s) const {
  const double period = perimeter();
  s = std::fmod(s, period);
  if (s < 0.0) s += period;
  if (shape_ == Shape::disk) return Point(std::cos(s), std::sin(s));
  if (s < 1.0) return Point(s, 0.0);
  if (s < 2.0) return Point(1.0, s - 1.0);
  if (s < 3.0) return Point(3.0 - s, 1.0);
  return Point(0.0, 4.0 - s);
}

double DiscreteDomain::distance_to_boundary(const Point& x) const {
  if (shape_ == Shape::disk) return std::max(0.0, 1.0 - x.norm());
  return std::max(0.0, std::min({x.x(), 1.0 - x.x(), x.y(), 1.0 - x.y()}));
}

bool DiscreteDomain::contains(const Point& x) const {
  constexpr double tol = 1e-12;
  if (shape_ == Shape::disk) return x.norm() <= 1.0 + tol;
  return x.x() >= -tol && x.x() <= 1.0 + tol && x.y() >= -tol && x.y() <= 1.0 + tol;
}

DomainPtr build_domain(Shape shape, int resolution) {
  return std::make_shared<const DiscreteDomain>(shape, resolution);
}

}  // namespace calderon
