// CSV and JSON serialization of nodal and boundary fields.
//
// CSV columns: node, x1, x2, re, im. Node indices are global for grid
// functions and boundary-local for boundary functions.

#ifndef CALDERON_IO_HPP
#define CALDERON_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "calderon/domain.hpp"

namespace calderon {

void write_csv(std::ostream& out, const Field& u);
void write_csv(std::ostream& out, const RealField& u);
void write_csv(std::ostream& out, const BoundaryField& g);

// Reads values back onto `domain`; positions are checked against the domain.
Field read_field_csv(std::istream& in, const DomainPtr& domain);
BoundaryField read_boundary_csv(std::istream& in, const DomainPtr& domain);

nlohmann::json domain_metadata(const DiscreteDomain& domain);

// {"domain": {...}, "kind": ..., "values": [[re, im], ...], "metadata": ...}
nlohmann::json to_json(const Field& u, const nlohmann::json& metadata = nlohmann::json::object());
nlohmann::json to_json(const BoundaryField& g,
                       const nlohmann::json& metadata = nlohmann::json::object());

// Writes the whole string, throwing std::runtime_error on failure.
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace calderon

#endif  // CALDERON_IO_HPP
