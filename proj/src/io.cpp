#include "calderon/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace calderon {

namespace {

constexpr const char* kHeader = "node,x1,x2,re,im";

void write_row(std::ostream& out, Eigen::Index node, const Point& x, Complex v) {
  out << node << ',' << x.x() << ',' << x.y() << ',' << v.real() << ',' << v.imag() << '\n';
}

// Parses rows into `values`, matching node and position against the expected ones.
template <typename PositionOf>
void read_rows(std::istream& in, ComplexVector& values, PositionOf&& position_of) {
  std::string line;
  if (!std::getline(in, line) || line != kHeader)
    throw std::invalid_argument("field CSV must start with header '" + std::string(kHeader) + "'");
  Eigen::Index count = 0;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(row, cell, ',')) v.push_back(std::stod(cell));
    if (v.size() != 5)
      throw std::invalid_argument("field CSV line " + std::to_string(lineno) + ": expected 5 columns");
    const auto node = static_cast<Eigen::Index>(v[0]);
    if (node < 0 || node >= values.size())
      throw std::invalid_argument("field CSV line " + std::to_string(lineno) + ": node out of range");
    if ((position_of(node) - Point(v[1], v[2])).norm() > 1e-9)
      throw std::invalid_argument("field CSV line " + std::to_string(lineno) +
                                  ": position does not match the domain");
    values[node] = Complex(v[3], v[4]);
    ++count;
  }
  if (count != values.size()) throw std::invalid_argument("field CSV does not cover every node");
}

nlohmann::json values_json(const ComplexVector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back({v[i].real(), v[i].imag()});
  return out;
}

}  // namespace

void write_csv(std::ostream& out, const Field& u) {
  const DiscreteDomain& d = u.domain();
  out << kHeader << '\n' << std::setprecision(17);
  for (Eigen::Index i = 0; i < d.num_nodes(); ++i) write_row(out, i, d.position(i), u[i]);
}

void write_csv(std::ostream& out, const RealField& u) { write_csv(out, complexify(u)); }

void write_csv(std::ostream& out, const BoundaryField& g) {
  const DiscreteDomain& d = g.domain();
  out << kHeader << '\n' << std::setprecision(17);
  for (Eigen::Index j = 0; j < d.num_boundary(); ++j)
    write_row(out, j, d.position(d.boundary_node(j)), g[j]);
}

Field read_field_csv(std::istream& in, const DomainPtr& domain) {
  ComplexVector v = ComplexVector::Zero(domain->num_nodes());
  read_rows(in, v, [&](Eigen::Index i) { return domain->position(i); });
  return Field(domain, std::move(v));
}

BoundaryField read_boundary_csv(std::istream& in, const DomainPtr& domain) {
  ComplexVector v = ComplexVector::Zero(domain->num_boundary());
  read_rows(in, v, [&](Eigen::Index j) { return domain->position(domain->boundary_node(j)); });
  return BoundaryField(domain, std::move(v));
}

nlohmann::json domain_metadata(const DiscreteDomain& domain) {
  return {{"shape", to_string(domain.shape())},
          {"resolution", domain.resolution()},
          {"h", domain.h()},
          {"nodes", domain.num_nodes()},
          {"interior_nodes", domain.num_interior()},
          {"boundary_nodes", domain.num_boundary()}};
}

nlohmann::json to_json(const Field& u, const nlohmann::json& metadata) {
  return {{"domain", domain_metadata(u.domain())},
          {"kind", "grid"},
          {"values", values_json(u.values())},
          {"metadata", metadata}};
}

nlohmann::json to_json(const BoundaryField& g, const nlohmann::json& metadata) {
  return {{"domain", domain_metadata(g.domain())},
          {"kind", "boundary"},
          {"values", values_json(g.values())},
          {"metadata", metadata}};
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << contents;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace calderon
