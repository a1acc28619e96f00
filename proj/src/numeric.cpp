#include "reebcone/numeric.hpp"

#include <atomic>
#include <cctype>
#include <cmath>
#include <numeric>
#include <sstream>

namespace reebcone {

namespace {
std::atomic<unsigned> g_precision_bits{0};
std::atomic<double> g_real_tol{1e-10};
}  // namespace

std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Usage: return "Usage";
    case ErrorCode::InputUnreadable: return "InputUnreadable";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonIntegerRay: return "NonIntegerRay";
    case ErrorCode::InvalidRay: return "InvalidRay";
    case ErrorCode::NotFullDimensional: return "NotFullDimensional";
    case ErrorCode::NotPointed: return "NotPointed";
    case ErrorCode::RedundantRay: return "RedundantRay";
    case ErrorCode::ExceedsSupportedSize: return "ExceedsSupportedSize";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::NotQGorenstein: return "NotQGorenstein";
    case ErrorCode::DegenerateSolutionSet: return "DegenerateSolutionSet";
    case ErrorCode::NotInReebCone: return "NotInReebCone";
    case ErrorCode::UnboundedSlice: return "UnboundedSlice";
    case ErrorCode::IrrationalReeb: return "IrrationalReeb";
    case ErrorCode::OrderTooLarge: return "OrderTooLarge";
    case ErrorCode::CutoffTooSmall: return "CutoffTooSmall";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::BoundaryRequiresExperimental: return "BoundaryRequiresExperimental";
    case ErrorCode::LeftReebCone: return "LeftReebCone";
    case ErrorCode::MaxIterations: return "MaxIterations";
    case ErrorCode::NonConvergent: return "NonConvergent";
  }
  return "Unknown";
}

void set_working_precision_bits(unsigned bits) {
  if (bits < 64) bits = 64;
  g_precision_bits = bits;
  // digits10 = floor(bits * log10(2)), rounded up so the binary precision is >= bits.
  auto digits10 = static_cast<unsigned>(std::ceil(bits * 0.30102999566398120));
  Real::default_precision(digits10);
}

unsigned working_precision_bits() {
  unsigned bits = g_precision_bits;
  if (bits != 0) return bits;
  return static_cast<unsigned>(std::floor(Real::default_precision() / 0.30102999566398120));
}

void set_real_tolerance(double tol) {
  if (!(tol > 0.0) || !std::isfinite(tol)) {
    throw Error(ErrorCode::InvalidArgument, "tolerance must be positive and finite");
  }
  g_real_tol = tol;
}

double real_tolerance() { return g_real_tol; }

std::int64_t dot(const IntVec& a, const IntVec& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch, "dot: length mismatch");
  }
  __int128 s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<__int128>(a[i]) * b[i];
  if (s > INT64_MAX || s < INT64_MIN) throw Error(ErrorCode::Overflow, "integer dot product overflows");
  return static_cast<std::int64_t>(s);
}

Real to_real(const Rational& q) { return Real(q); }

Vec<Real> to_real(const Vec<Rational>& v) {
  Vec<Real> out;
  out.reserve(v.size());
  for (const auto& q : v) out.emplace_back(q);
  return out;
}

IntVec primitive(const IntVec& v) {
  std::int64_t g = 0;
  for (auto x : v) g = std::gcd(g, x);
  if (g <= 1) return v;
  IntVec out(v);
  for (auto& x : out) x /= g;
  return out;
}

bool is_primitive(const IntVec& v) {
  std::int64_t g = 0;
  for (auto x : v) g = std::gcd(g, x);
  return g == 1;
}

std::string to_string(const Rational& q) { return q.str(); }

std::string to_string(const Real& x, int digits) {
  if (x == 0) return "0";
  return x.str(digits, std::ios_base::scientific);
}

std::string to_string(const IntVec& v) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  os << ']';
  return os.str();
}

Rational parse_rational(std::string_view text) {
  auto bad = [&] {
    return Error(ErrorCode::SchemaError, "not a rational number: '" + std::string(text) + "'");
  };
  std::string s(text);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  std::size_t start = 0;
  while (start < s.size() && std::isspace(static_cast<unsigned char>(s[start]))) ++start;
  s = s.substr(start);
  if (s.empty()) throw bad();

  if (auto slash = s.find('/'); slash != std::string::npos) {
    Rational num = parse_rational(s.substr(0, slash));
    Rational den = parse_rational(s.substr(slash + 1));
    if (denominator(num) != 1 || denominator(den) != 1) throw bad();
    if (den == 0) throw Error(ErrorCode::SchemaError, "zero denominator in '" + s + "'");
    return num / den;
  }

  // Decimal: [sign] digits [. digits] [e [sign] digits]
  std::size_t i = 0;
  bool negative = false;
  if (s[i] == '+' || s[i] == '-') negative = s[i++] == '-';
  std::string digits;
  long exponent = 0;
  bool any_digit = false;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
    digits += s[i++];
    any_digit = true;
  }
  if (i < s.size() && s[i] == '.') {
    ++i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
      digits += s[i++];
      --exponent;
      any_digit = true;
    }
  }
  if (!any_digit) throw bad();
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    ++i;
    std::size_t used = 0;
    long e = 0;
    try {
      e = std::stol(s.substr(i), &used);
    } catch (const std::exception&) {
      throw bad();
    }
    if (used == 0 || e > 100000 || e < -100000) throw bad();
    i += used;
    exponent += e;
  }
  if (i != s.size()) throw bad();

  // A leading zero would make GMP read the string as octal.
  auto nz = digits.find_first_not_of('0');
  digits = nz == std::string::npos ? "0" : digits.substr(nz);
  Integer mantissa(digits);
  Integer scale = boost::multiprecision::pow(Integer(10), static_cast<unsigned>(std::labs(exponent)));
  Rational value = exponent >= 0 ? Rational(mantissa * scale) : Rational(mantissa, scale);
  return negative ? Rational(-value) : value;
}

}  // namespace reebcone
