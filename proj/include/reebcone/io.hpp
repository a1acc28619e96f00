#ifndef REEBCONE_IO_HPP
#define REEBCONE_IO_HPP

// Cone-spec ingestion and report generation behind the `reebcone` CLI.
//
// Input is one JSON document:
//   {"name": "conifold", "dim": 3,
//    "rays": [[1,0,0],[1,1,0],[1,1,1],[1,0,1]],
//    "xi": [1, "1/2", [1,2]], "eta": [...], "boundary_coeffs": [...]}
// Vector entries may be integers, "p/q" or decimal strings, or [num, den]
// pairs (all exact), or JSON floating-point numbers (which switch the whole
// vector to working-precision reals). Output is one JSON report with every
// rational written as an exact "p/q" string.

#include "reebcone/numeric.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace reebcone::io {

inline constexpr const char* kVersion = "0.1.0";

using Json = nlohmann::ordered_json;
using VectorValue = std::variant<Vec<Rational>, Vec<Real>>;

struct ConeSpec {
  std::string name;
  std::size_t dim = 0;
  std::vector<IntVec> rays;
  std::optional<VectorValue> xi;
  std::optional<VectorValue> eta;
  std::optional<Vec<Rational>> boundary_coeffs;
  std::vector<std::string> warnings;
};

/// Throws SchemaError / DimensionMismatch / NonIntegerRay with the position
/// ("line L, column C" for syntax errors, the field path otherwise).
ConeSpec parse_cone_spec(std::string_view text);

/// Comma-separated vector from a command-line flag, e.g. "1,1/2,0.25".
Vec<Rational> parse_vector_flag(std::string_view text);

struct Provenance {
  std::string arithmetic;  // "exact-rational" or "real"
  unsigned precision_bits = 0;
  std::string tolerance;
  std::string version;
};

struct ReportError {
  std::string name;
  std::string message;
};

struct Report {
  std::string command;
  std::string input_hash;
  std::string spec_name;
  Json results = Json::object();
  Provenance provenance;
  std::vector<std::string> warnings;
  std::optional<ReportError> error;
};

Json to_json(const Report& report);
Report report_from_json(const Json& j);
/// Pretty-printed JSON with a trailing newline; byte-stable.
std::string serialize(const Report& report);

struct RunFlags {
  std::optional<std::string> xi;
  std::optional<std::string> eta;
  int order = 2;
  double tol = 1e-10;
  std::int64_t m_max = 20;
  std::int64_t probe_rational = 0;
  std::vector<double> t_values;
  std::size_t grid = 0;  // minimize: also run the grid oracle at this resolution
  unsigned threads = 1;
  bool experimental_boundary = false;
};

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> names{"check", "delta", "minimize", "futaki", "character", "oracle"};
  return names;
}

/// Runs one command. Library errors are captured in Report::error.
Report run(const std::string& command, const ConeSpec& spec, const RunFlags& flags, std::string_view spec_text = {});

/// 0 on success; 1 usage, 2 input, 3 math-domain, 4 non-convergence.
int exit_code(ErrorCode code);
int exit_code(const Report& report);

std::string sha256_hex(std::string_view data);

}  // namespace reebcone::io

#endif  // REEBCONE_IO_HPP
