#pragma once

#include <cmath>
#include <cstdint>
#include <type_traits>

#include <boost/multiprecision/cpp_int.hpp>

#include "gcmc/error.hpp"

namespace gcmc {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// Scalar helpers so the distribution and kernel code can run on both double
// and exact rationals.

inline double to_double(double x) { return x; }
inline double to_double(const Rational& x) { return static_cast<double>(x); }

inline double abs_value(double x) { return std::fabs(x); }
inline Rational abs_value(const Rational& x) { return boost::multiprecision::abs(x); }

/// Ceiling of a positive scalar as a 64-bit integer; throws when it does not fit.
inline std::uint64_t ceil_to_u64(double x) {
  double c = std::ceil(x);
  if (!(c >= 0.0) || c >= 1.8e19) throw Error(ErrorCode::InvalidArgument, "value out of integer range");
  return static_cast<std::uint64_t>(c);
}

inline std::uint64_t ceil_to_u64(const Rational& x) {
  if (x < 0) throw Error(ErrorCode::InvalidArgument, "negative value");
  BigInt num = boost::multiprecision::numerator(x);
  BigInt den = boost::multiprecision::denominator(x);
  BigInt q = num / den;
  if (q * den != num) q += 1;
  if (q > BigInt(std::numeric_limits<std::uint64_t>::max()))
    throw Error(ErrorCode::InvalidArgument, "value out of integer range");
  return q.convert_to<std::uint64_t>();
}

/// Tolerance expressed in the scalar type. Exact types get zero tolerance.
template <class T>
T tolerance(double tol) {
  if constexpr (std::is_floating_point_v<T>) return static_cast<T>(tol);
  else return T(0);
}

}  // namespace gcmc
