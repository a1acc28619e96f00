// reebcone <command> --spec FILE [options]
//
// Environment: REEBCONE_PRECISION (bits, default 128), REEBCONE_TOL (default 1e-10).

#include "reebcone/io.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void emit(const reebcone::io::Report& report, const std::string& json_out) {
  const std::string text = reebcone::io::serialize(report);
  std::cout << text;
  if (!json_out.empty()) {
    std::ofstream out(json_out, std::ios::binary);
    out << text;
  }
}

reebcone::io::Report bare_report(const std::string& command, reebcone::ErrorCode code, const std::string& msg,
                                 double tol) {
  reebcone::io::Report r;
  r.command = command;
  r.provenance.arithmetic = "exact-rational";
  r.provenance.precision_bits = reebcone::working_precision_bits();
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", tol);
  r.provenance.tolerance = buf;
  r.provenance.version = reebcone::io::kVersion;
  r.error = reebcone::io::ReportError{std::string(reebcone::error_name(code)), msg};
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace reebcone;

  unsigned bits = 128;
  double tol = 1e-10;
  try {
    if (const char* p = std::getenv("REEBCONE_PRECISION")) bits = static_cast<unsigned>(std::stoul(p));
    if (const char* t = std::getenv("REEBCONE_TOL")) tol = std::stod(t);
    set_working_precision_bits(bits);
    set_real_tolerance(tol);
  } catch (const std::exception& e) {
    std::cerr << "reebcone: bad REEBCONE_PRECISION or REEBCONE_TOL: " << e.what() << "\n";
    return 1;
  }

  CLI::App app{"Volume minimization and K-stability for toric Calabi-Yau cones"};
  app.set_version_flag("--version", io::kVersion);
  std::string command;
  std::string spec_path;
  std::string json_out;
  std::string xi, eta;
  io::RunFlags flags;
  flags.tol = tol;

  app.add_option("command", command, "check | delta | minimize | futaki | character | oracle")
      ->required()
      ->check(CLI::IsMember(io::commands()));
  app.add_option("--spec", spec_path, "cone spec JSON file")->required();
  app.add_option("--xi", xi, "Reeb vector, comma separated (e.g. 3,1/2,0.5)");
  app.add_option("--eta", eta, "test direction, comma separated");
  app.add_option("--order", flags.order, "Laurent expansion order")->check(CLI::Range(0, 16));
  app.add_option("--tol", flags.tol, "optimizer tolerance");
  app.add_option("--m-max", flags.m_max, "largest m in the S_m table")->check(CLI::PositiveNumber);
  app.add_option("--probe-rational", flags.probe_rational, "denominator bound for the rationality probe");
  app.add_option("--t", flags.t_values, "sample points for the truncated character oracle");
  app.add_option("--grid", flags.grid, "grid oracle resolution for minimize (0 = off)");
  app.add_option("--threads", flags.threads, "worker threads")->check(CLI::Range(1u, 256u));
  app.add_flag("--experimental-boundary", flags.experimental_boundary, "allow a nonzero boundary divisor");
  app.add_option("--json-out", json_out, "also write the report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  if (!xi.empty()) flags.xi = xi;
  if (!eta.empty()) flags.eta = eta;

  auto text = read_file(spec_path);
  if (!text) {
    auto r = bare_report(command, ErrorCode::InputUnreadable, "cannot read '" + spec_path + "'", flags.tol);
    emit(r, json_out);
    return io::exit_code(r);
  }

  io::Report report;
  try {
    auto spec = io::parse_cone_spec(*text);
    report = io::run(command, spec, flags, *text);
  } catch (const Error& e) {
    report = bare_report(command, e.code(), e.what(), flags.tol);
    report.input_hash = "sha256:" + io::sha256_hex(*text);
  }
  emit(report, json_out);
  if (report.error) std::cerr << "reebcone: " << report.error->name << ": " << report.error->message << "\n";
  return io::exit_code(report);
}
