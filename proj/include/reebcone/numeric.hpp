#ifndef REEBCONE_NUMERIC_HPP
#define REEBCONE_NUMERIC_HPP

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace reebcone {

using Integer = boost::multiprecision::mpz_int;
using Rational = boost::multiprecision::mpq_rational;
using Real = boost::multiprecision::mpfr_float;

using IntVec = std::vector<std::int64_t>;
template <class T>
using Vec = std::vector<T>;

// Every failure the library can report. The CLI maps these to exit codes.
enum class ErrorCode {
  Usage,
  InputUnreadable,
  SchemaError,
  DimensionMismatch,
  NonIntegerRay,
  InvalidRay,
  NotFullDimensional,
  NotPointed,
  RedundantRay,
  ExceedsSupportedSize,
  Overflow,
  NotQGorenstein,
  DegenerateSolutionSet,
  NotInReebCone,
  UnboundedSlice,
  IrrationalReeb,
  OrderTooLarge,
  CutoffTooSmall,
  InvalidArgument,
  BoundaryRequiresExperimental,
  LeftReebCone,
  MaxIterations,
  NonConvergent,
};

std::string_view error_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view name() const { return error_name(code_); }

 private:
  ErrorCode code_;
};

// Working precision for Real. Applies to Real values constructed afterwards.
void set_working_precision_bits(unsigned bits);
unsigned working_precision_bits();

// Relative tolerance used for membership and equality tests on Real values.
void set_real_tolerance(double tol);
double real_tolerance();

template <class T>
inline constexpr bool is_exact_v = std::is_same_v<T, Rational>;

/// Sign of x; Real values within `scale * real_tolerance()` of zero count as zero.
template <class T>
int sign_of(const T& x, const T& scale = T(1)) {
  if constexpr (is_exact_v<T>) {
    (void)scale;
    return x.sign();
  } else {
    using boost::multiprecision::abs;
    T bound = T(real_tolerance()) * (abs(scale) > 1 ? abs(scale) : T(1));
    if (abs(x) <= bound) return 0;
    return x < 0 ? -1 : 1;
  }
}

template <class T>
T abs_of(const T& x) {
  return x < 0 ? T(-x) : x;
}

template <class T, class U>
T dot(const Vec<T>& a, const std::vector<U>& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch, "dot: length mismatch");
  }
  T s(0);
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * T(b[i]);
  return s;
}

std::int64_t dot(const IntVec& a, const IntVec& b);

template <class T>
Vec<T> to_field(const IntVec& v) {
  Vec<T> out;
  out.reserve(v.size());
  for (auto x : v) out.emplace_back(x);
  return out;
}

Vec<Real> to_real(const Vec<Rational>& v);
Real to_real(const Rational& q);

template <class T>
T max_abs(const Vec<T>& v) {
  T m(0);
  for (const auto& x : v) {
    T a = abs_of(x);
    if (a > m) m = a;
  }
  return m;
}

/// Divides by the gcd of the entries. Zero vectors are returned unchanged.
IntVec primitive(const IntVec& v);
bool is_primitive(const IntVec& v);

// "p/q", or "p" when q == 1.
std::string to_string(const Rational& q);
// Decimal scientific string with `digits` significant digits.
std::string to_string(const Real& x, int digits = 30);
std::string to_string(const IntVec& v);

// Accepts "p", "p/q", and finite decimals such as "-0.125" or "3e-2".
Rational parse_rational(std::string_view text);

}  // namespace reebcone

#endif  // REEBCONE_NUMERIC_HPP
