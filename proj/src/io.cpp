#include "reebcone/io.hpp"

#include "reebcone/characters.hpp"
#include "reebcone/geometry.hpp"
#include "reebcone/optimize.hpp"
#include "reebcone/stability.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <sstream>

namespace reebcone::io {

using geometry::ReebVector;
using geometry::ToricCone;

namespace {

Error schema(const std::string& where, const std::string& what) {
  return Error(ErrorCode::SchemaError, where + ": " + what);
}

std::string line_col(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

// One vector entry; sets `real` when it is a JSON float.
Rational parse_entry(const nlohmann::json& e, const std::string& where, bool& real, Real& real_value) {
  if (e.is_number_integer()) return Rational(e.get<std::int64_t>());
  if (e.is_number_float()) {
    real = true;
    real_value = Real(e.get<double>());
    return Rational(0);
  }
  if (e.is_string()) {
    try {
      return parse_rational(e.get<std::string>());
    } catch (const Error& err) {
      throw schema(where, err.what());
    }
  }
  if (e.is_array() && e.size() == 2 && e[0].is_number_integer() && e[1].is_number_integer()) {
    auto den = e[1].get<std::int64_t>();
    if (den == 0) throw schema(where, "zero denominator");
    return Rational(e[0].get<std::int64_t>(), den);
  }
  throw schema(where, "expected an integer, \"p/q\" or decimal string, [num, den] pair, or number");
}

VectorValue parse_vector(const nlohmann::json& j, const std::string& field, std::size_t dim) {
  if (!j.is_array()) throw schema(field, "expected an array");
  if (j.size() != dim) {
    throw Error(ErrorCode::DimensionMismatch,
                field + ": has " + std::to_string(j.size()) + " entries, expected " + std::to_string(dim));
  }
  Vec<Rational> exact;
  Vec<Real> reals;
  bool any_real = false;
  for (std::size_t k = 0; k < j.size(); ++k) {
    bool real = false;
    Real rv;
    Rational q = parse_entry(j[k], field + "[" + std::to_string(k) + "]", real, rv);
    any_real = any_real || real;
    exact.push_back(q);
    reals.push_back(real ? rv : Real(q));
  }
  if (any_real) return reals;
  return exact;
}

template <class T>
Json num(const T& x) {
  return to_string(x);
}

template <class T>
Json num_vec(const Vec<T>& v) {
  Json a = Json::array();
  for (const auto& x : v) a.push_back(to_string(x));
  return a;
}

Json int_vec(const IntVec& v) {
  Json a = Json::array();
  for (auto x : v) a.push_back(x);
  return a;
}

template <class T>
Json series_json(const characters::LaurentSeries<T>& s) {
  return Json{{"order_low", s.order_low}, {"coeffs", num_vec(s.coeffs)}};
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

template <class T>
Vec<T> convert(const VectorValue& v) {
  if constexpr (is_exact_v<T>) {
    if (std::holds_alternative<Vec<Real>>(v)) {
      throw Error(ErrorCode::IrrationalReeb, "expected an exact vector");
    }
    return std::get<Vec<Rational>>(v);
  } else {
    if (std::holds_alternative<Vec<Real>>(v)) return std::get<Vec<Real>>(v);
    return to_real(std::get<Vec<Rational>>(v));
  }
}

template <class T>
Json stability_json(const stability::StabilityReport<T>& r) {
  Json rays = Json::array();
  for (auto i : r.minimizing_rays) rays.push_back(i);
  return Json{{"delta", num(r.delta)},
              {"delta_prime", num(r.delta_prime)},
              {"delta_definitional", num(r.delta_definitional)},
              {"rescale", num(r.rescale)},
              {"xi_normalized", num_vec(r.xi_normalized)},
              {"bary_P", num_vec(r.bary_P)},
              {"bary_Q", num_vec(r.bary_Q)},
              {"gorenstein", num_vec(r.gorenstein)},
              {"ray_pairings", num_vec(r.ray_pairings)},
              {"minimizing_rays", rays},
              {"kss", r.kss},
              {"residual", num(r.residual)}};
}

struct Context {
  const ConeSpec& spec;
  const RunFlags& flags;
  const ToricCone& cone;
  Report& report;
};

template <class T>
std::optional<Vec<T>> resolve_eta(const Context& ctx) {
  if (ctx.flags.eta) return convert<T>(VectorValue(parse_vector_flag(*ctx.flags.eta)));
  if (ctx.spec.eta) return convert<T>(*ctx.spec.eta);
  return std::nullopt;
}

Vec<Rational> check_dim(Vec<Rational> v, std::size_t dim, const char* what) {
  if (v.size() != dim) {
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + " has " + std::to_string(v.size()) +
                                                  " entries, expected " + std::to_string(dim));
  }
  return v;
}

characters::ExpansionOptions expansion(const RunFlags& flags) {
  characters::ExpansionOptions o;
  o.threads = flags.threads;
  // An explicit --order is the requested depth.
  o.max_order = std::max(o.max_order, flags.order);
  return o;
}

template <class T>
void run_check(const Context& ctx, const Vec<T>& xi_vec) {
  Json& out = ctx.report.results;
  std::optional<geometry::GorensteinVector> l;
  try {
    l = geometry::gorenstein_vector(ctx.cone, ctx.spec.boundary_coeffs.value_or(Vec<Rational>{}));
    out["q_gorenstein"] = true;
    out["gorenstein"] = num_vec(l->l);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotQGorenstein && e.code() != ErrorCode::DegenerateSolutionSet) throw;
    out["q_gorenstein"] = false;
    out["gorenstein"] = nullptr;
    out["gorenstein_error"] = std::string(e.name());
  }
  out["xi"] = num_vec(xi_vec);
  std::optional<ReebVector<T>> xi;
  try {
    xi.emplace(ctx.cone, xi_vec);
    out["in_reeb_cone"] = true;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotInReebCone) throw;
    out["in_reeb_cone"] = false;
  }
  if (l && xi) {
    stability::DeltaOptions opts;
    opts.experimental_boundary = ctx.flags.experimental_boundary;
    auto r = stability::delta(ctx.cone, *xi, *l, opts);
    out["delta"] = num(r.delta);
    out["kss"] = r.kss;
    out["residual"] = num(r.residual);
  } else {
    out["kss"] = nullptr;
  }
}

template <class T>
void run_delta(const Context& ctx, const ReebVector<T>& xi) {
  auto l = geometry::gorenstein_vector(ctx.cone, ctx.spec.boundary_coeffs.value_or(Vec<Rational>{}));
  stability::DeltaOptions opts;
  opts.experimental_boundary = ctx.flags.experimental_boundary;
  ctx.report.results["xi"] = num_vec(xi.xi());
  ctx.report.results["report"] = stability_json(stability::delta(ctx.cone, xi, l, opts));
}

template <class T>
void run_futaki(const Context& ctx, const ReebVector<T>& xi) {
  auto eta = resolve_eta<T>(ctx);
  if (!eta) throw Error(ErrorCode::Usage, "futaki needs --eta or an eta field in the spec");
  auto pieces = characters::decompose_dual(ctx.cone);
  auto f = stability::futaki_product(pieces, xi, *eta, expansion(ctx.flags));
  Json& out = ctx.report.results;
  out["xi"] = num_vec(xi.xi());
  out["eta"] = num_vec(*eta);
  out["a0"] = num(f.coeffs.a0);
  out["a1"] = num(f.coeffs.a1);
  out["b0"] = num(f.coeffs.b0);
  out["b1"] = num(f.coeffs.b1);
  out["fut"] = num(f.fut);
}

template <class T>
void run_character(const Context& ctx, const ReebVector<T>& xi) {
  auto pieces = characters::decompose_dual(ctx.cone);
  auto opts = expansion(ctx.flags);
  const std::size_t n = ctx.cone.dim();
  Json& out = ctx.report.results;
  out["xi"] = num_vec(xi.xi());
  out["pieces"] = pieces.size();
  auto f = characters::index_character(pieces, xi, ctx.flags.order, opts);
  out["index"] = series_json(f);
  auto a = stability::index_coefficients(f, n);
  out["a0"] = num(a.a0);
  if (a.a1) out["a1"] = num(*a.a1);
  if (auto eta = resolve_eta<T>(ctx)) {
    auto c = characters::weight_character(pieces, xi, *eta, ctx.flags.order, opts);
    out["eta"] = num_vec(*eta);
    out["weight"] = series_json(c);
    if (n >= 2 && ctx.flags.order >= 1) {
      auto k = stability::coefficients(f, c, n);
      out["b0"] = num(k.b0);
      out["b1"] = num(k.b1);
    }
  }
}

template <class T>
void run_oracle(const Context& ctx, const ReebVector<T>& xi) {
  Json& out = ctx.report.results;
  out["xi"] = num_vec(xi.xi());
  if (!ctx.flags.t_values.empty()) {
    auto eta = resolve_eta<T>(ctx);
    auto pieces = characters::decompose_dual(ctx.cone);
    auto opts = expansion(ctx.flags);
    auto f = characters::index_character(pieces, xi, ctx.flags.order, opts);
    std::optional<characters::LaurentSeries<T>> c;
    if (eta) c = characters::weight_character(pieces, xi, *eta, ctx.flags.order, opts);
    Json rows = Json::array();
    for (double t : ctx.flags.t_values) {
      const double tol = 1e-12;
      std::optional<Vec<T>> none;
      double cutoff = characters::choose_cutoff(ctx.cone, xi, none, t, tol);
      auto value = characters::truncated_character_oracle(ctx.cone, xi, none, t, cutoff, tol);
      Json row{{"t", format_double(t)},
               {"cutoff", format_double(cutoff)},
               {"index_oracle", to_string(Real(static_cast<double>(value.value)), 17)},
               {"index_series", to_string(Real(static_cast<double>(f.evaluate(t))), 17)}};
      if (eta) {
        double cw = characters::choose_cutoff(ctx.cone, xi, eta, t, tol);
        auto w = characters::truncated_character_oracle(ctx.cone, xi, eta, t, cw, tol);
        row["weight_oracle"] = to_string(Real(static_cast<double>(w.value)), 17);
        row["weight_series"] = to_string(Real(static_cast<double>(c->evaluate(t))), 17);
      }
      rows.push_back(std::move(row));
    }
    out["characters"] = std::move(rows);
    return;
  }
  if constexpr (!is_exact_v<T>) {
    throw Error(ErrorCode::IrrationalReeb, "the S_m table requires a rational Reeb vector");
  } else {
    if (ctx.flags.m_max < 1) throw Error(ErrorCode::Usage, "--m-max must be positive");
    auto slice = geometry::polytope_q(ctx.cone, xi);
    Json table = Json::array();
    for (std::size_t i = 0; i < ctx.cone.rays().size(); ++i) {
      const auto v = to_field<Rational>(ctx.cone.rays()[i]);
      Json sm = Json::array();
      for (std::int64_t m = 1; m <= ctx.flags.m_max; ++m) {
        sm.push_back(Json{{"m", m}, {"S_m", num(stability::s_m_oracle(ctx.cone, xi, v, m))}});
      }
      table.push_back(Json{{"ray", int_vec(ctx.cone.rays()[i])}, {"S", num(dot(v, slice.bary_Q))}, {"S_m", sm}});
    }
    out["s_m"] = std::move(table);
  }
}

void run_minimize(const Context& ctx) {
  optimize::MinimizeOptions opts;
  opts.tol = ctx.flags.tol;
  opts.probe_denominator = ctx.flags.probe_rational;
  auto r = optimize::minimize_volume(ctx.cone, opts);
  Json& out = ctx.report.results;
  out["xi_star"] = num_vec(r.xi_star.xi());
  out["a0_star"] = num(r.a0_star);
  out["vol_star"] = num(r.vol_star);
  out["gradient_norm"] = num(r.gradient_norm);
  out["step_norm"] = num(r.step_norm);
  out["iterations"] = r.iterations;
  out["kss_residual"] = num(r.kss_residual);
  out["delta_star"] = num(r.delta_star);
  out["margin"] = num(r.margin);
  if (r.rational_candidate) {
    const auto& c = *r.rational_candidate;
    out["rational_candidate"] = Json{{"xi", num_vec(c.xi)},
                                     {"denominator", c.denominator},
                                     {"denominator_bound", c.denominator_bound},
                                     {"distance", num(c.distance)}};
  }
  if (ctx.flags.grid > 0) {
    auto g = optimize::grid_search_oracle(ctx.cone, ctx.flags.grid, ctx.flags.threads);
    out["grid"] = Json{{"samples", g.samples}, {"xi", num_vec(g.xi)}, {"value", num(g.value)},
                       {"spacing", num_vec(g.spacing)}};
  }
}

template <class T>
void dispatch(const Context& ctx, const std::string& command, const Vec<T>& xi_vec) {
  if (command == "check") return run_check(ctx, xi_vec);
  ReebVector<T> xi(ctx.cone, xi_vec);
  if (command == "delta") return run_delta(ctx, xi);
  if (command == "futaki") return run_futaki(ctx, xi);
  if (command == "character") return run_character(ctx, xi);
  if (command == "oracle") return run_oracle(ctx, xi);
  throw Error(ErrorCode::Usage, "unknown command '" + command + "'");
}

std::string tolerance_string(double tol) { return format_double(tol); }

}  // namespace

ConeSpec parse_cone_spec(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    std::string msg = e.what();
    auto pos = msg.find("] ");
    throw Error(ErrorCode::SchemaError,
                line_col(text, e.byte > 0 ? e.byte - 1 : 0) + ": " + (pos == std::string::npos ? msg : msg.substr(pos + 2)));
  }
  if (!j.is_object()) throw schema("document", "expected a JSON object");

  ConeSpec spec;
  static const std::vector<std::string> known{"name", "source", "dim", "rays", "xi", "eta", "boundary_coeffs"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      spec.warnings.push_back("unknown field '" + key + "' ignored");
    }
  }
  if (j.contains("name")) {
    if (!j["name"].is_string()) throw schema("name", "expected a string");
    spec.name = j["name"].get<std::string>();
  }
  if (!j.contains("dim")) throw schema("dim", "missing required field");
  if (!j["dim"].is_number_integer() || j["dim"].get<std::int64_t>() < 1) {
    throw schema("dim", "expected a positive integer");
  }
  spec.dim = j["dim"].get<std::size_t>();
  if (!j.contains("rays")) throw schema("rays", "missing required field");
  if (!j["rays"].is_array()) throw schema("rays", "expected an array of integer vectors");
  const auto& rays = j["rays"];
  for (std::size_t i = 0; i < rays.size(); ++i) {
    const std::string where = "rays[" + std::to_string(i) + "]";
    if (!rays[i].is_array()) throw schema(where, "expected an array");
    if (rays[i].size() != spec.dim) {
      throw Error(ErrorCode::DimensionMismatch, where + ": has " + std::to_string(rays[i].size()) +
                                                    " entries, expected " + std::to_string(spec.dim));
    }
    IntVec v;
    for (std::size_t k = 0; k < rays[i].size(); ++k) {
      const auto& e = rays[i][k];
      if (!e.is_number_integer()) {
        throw Error(ErrorCode::NonIntegerRay, where + "[" + std::to_string(k) + "]: expected an integer");
      }
      v.push_back(e.get<std::int64_t>());
    }
    IntVec p = primitive(v);
    if (p != v) spec.warnings.push_back("ray " + std::to_string(i) + " re-primitivized to " + to_string(p));
    spec.rays.push_back(std::move(p));
  }
  if (j.contains("xi")) spec.xi = parse_vector(j["xi"], "xi", spec.dim);
  if (j.contains("eta")) spec.eta = parse_vector(j["eta"], "eta", spec.dim);
  if (j.contains("boundary_coeffs")) {
    const auto& b = j["boundary_coeffs"];
    auto v = parse_vector(b, "boundary_coeffs", b.is_array() ? b.size() : 0);
    if (!std::holds_alternative<Vec<Rational>>(v)) throw schema("boundary_coeffs", "coefficients must be exact");
    if (std::get<Vec<Rational>>(v).size() != spec.rays.size()) {
      throw Error(ErrorCode::DimensionMismatch, "boundary_coeffs: need one coefficient per ray");
    }
    spec.boundary_coeffs = std::get<Vec<Rational>>(v);
  }
  return spec;
}

Vec<Rational> parse_vector_flag(std::string_view text) {
  Vec<Rational> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto comma = text.find(',', start);
    auto piece = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    out.push_back(parse_rational(piece));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

Json to_json(const Report& r) {
  Json j;
  j["command"] = r.command;
  j["input_hash"] = r.input_hash;
  j["spec_name"] = r.spec_name;
  j["results"] = r.results;
  j["provenance"] = Json{{"arithmetic", r.provenance.arithmetic},
                         {"precision_bits", r.provenance.precision_bits},
                         {"tolerance", r.provenance.tolerance},
                         {"version", r.provenance.version}};
  j["warnings"] = r.warnings;
  if (r.error) {
    j["error"] = Json{{"name", r.error->name}, {"message", r.error->message}};
  } else {
    j["error"] = nullptr;
  }
  return j;
}

Report report_from_json(const Json& j) {
  Report r;
  try {
    r.command = j.at("command").get<std::string>();
    r.input_hash = j.at("input_hash").get<std::string>();
    r.spec_name = j.at("spec_name").get<std::string>();
    r.results = j.at("results");
    const auto& p = j.at("provenance");
    r.provenance.arithmetic = p.at("arithmetic").get<std::string>();
    r.provenance.precision_bits = p.at("precision_bits").get<unsigned>();
    r.provenance.tolerance = p.at("tolerance").get<std::string>();
    r.provenance.version = p.at("version").get<std::string>();
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    if (!j.at("error").is_null()) {
      r.error = ReportError{j["error"].at("name").get<std::string>(), j["error"].at("message").get<std::string>()};
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("report: ") + e.what());
  }
  return r;
}

std::string serialize(const Report& report) { return to_json(report).dump(2) + "\n"; }

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::InvalidArgument, "sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

Report run(const std::string& command, const ConeSpec& spec, const RunFlags& flags, std::string_view spec_text) {
  Report report;
  report.command = command;
  report.spec_name = spec.name;
  report.input_hash = "sha256:" + sha256_hex(spec_text);
  report.warnings = spec.warnings;
  report.provenance.precision_bits = working_precision_bits();
  report.provenance.tolerance = tolerance_string(flags.tol);
  report.provenance.version = kVersion;
  report.provenance.arithmetic = "exact-rational";

  try {
    if (std::find(commands().begin(), commands().end(), command) == commands().end()) {
      throw Error(ErrorCode::Usage, "unknown command '" + command + "'");
    }
    ToricCone cone = geometry::dual_cone(spec.rays, spec.dim);
    for (const auto& w : cone.warnings()) report.warnings.push_back(w);
    Context ctx{spec, flags, cone, report};

    if (command == "minimize") {
      report.provenance.arithmetic = "real";
      run_minimize(ctx);
      return report;
    }

    VectorValue xi;
    if (flags.xi) {
      xi = check_dim(parse_vector_flag(*flags.xi), spec.dim, "--xi");
    } else if (spec.xi) {
      xi = *spec.xi;
    } else {
      Vec<Rational> sum(spec.dim, Rational(0));
      for (const auto& v : cone.rays())
        for (std::size_t k = 0; k < spec.dim; ++k) sum[k] += v[k];
      xi = sum;
      report.warnings.push_back("no xi given; using the sum of the rays");
    }
    if (flags.eta) check_dim(parse_vector_flag(*flags.eta), spec.dim, "--eta");
    const bool real = std::holds_alternative<Vec<Real>>(xi) ||
                      (!flags.eta && spec.eta && std::holds_alternative<Vec<Real>>(*spec.eta));
    if (real) {
      report.provenance.arithmetic = "real";
      dispatch<Real>(ctx, command, convert<Real>(xi));
    } else {
      dispatch<Rational>(ctx, command, std::get<Vec<Rational>>(xi));
    }
  } catch (const Error& e) {
    report.results = Json::object();
    report.error = ReportError{std::string(e.name()), e.what()};
  }
  return report;
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::Usage:
      return 1;
    case ErrorCode::InputUnreadable:
    case ErrorCode::SchemaError:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::NonIntegerRay:
    case ErrorCode::InvalidRay:
    case ErrorCode::NotFullDimensional:
    case ErrorCode::NotPointed:
    case ErrorCode::RedundantRay:
    case ErrorCode::ExceedsSupportedSize:
    case ErrorCode::Overflow:
    case ErrorCode::InvalidArgument:
      return 2;
    case ErrorCode::NotQGorenstein:
    case ErrorCode::DegenerateSolutionSet:
    case ErrorCode::NotInReebCone:
    case ErrorCode::UnboundedSlice:
    case ErrorCode::IrrationalReeb:
    case ErrorCode::OrderTooLarge:
    case ErrorCode::CutoffTooSmall:
    case ErrorCode::BoundaryRequiresExperimental:
    case ErrorCode::LeftReebCone:
      return 3;
    case ErrorCode::MaxIterations:
    case ErrorCode::NonConvergent:
      return 4;
  }
  return 2;
}

int exit_code(const Report& report) {
  if (!report.error) return 0;
  for (int c = 0; c <= static_cast<int>(ErrorCode::NonConvergent); ++c) {
    auto code = static_cast<ErrorCode>(c);
    if (error_name(code) == report.error->name) return exit_code(code);
  }
  return 2;
}

}  // namespace reebcone::io
