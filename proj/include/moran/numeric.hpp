#pragma once

#include <gmpxx.h>
#include <mpfr.h>

#include <cstdint>
#include <string>
#include <string_view>

namespace moran {

using Rational = mpq_class;
using Integer = mpz_class;

inline constexpr mpfr_prec_t kDefaultPrecision = 128;
inline constexpr mpfr_prec_t kLogPrecision = 256;

// num/den in lowest terms.
inline Rational fraction(long num, long den) {
  Rational q(num, den);
  q.canonicalize();
  return q;
}

// "p/q" with q >= 1 always present, e.g. "0/1", "1/1", "-3/4".
std::string to_string(const Rational& q);

// Accepts "p/q", "p", and finite decimals such as "0.25" or "-1.5e-3"
// (converted exactly). Throws Error{parse} otherwise.
Rational parse_rational(std::string_view text);

// Exact conversion of a finite double.
Rational rational_from_double(double x);

// Shortest round-trip formatting used by every CSV/JSON writer.
std::string format_double(double x);

// Owning wrapper around an mpfr_t with value semantics.
class BigFloat {
 public:
  explicit BigFloat(mpfr_prec_t precision = kDefaultPrecision);
  BigFloat(const Rational& q, mpfr_prec_t precision, mpfr_rnd_t rnd = MPFR_RNDN);
  BigFloat(double x, mpfr_prec_t precision);
  BigFloat(const BigFloat& other);
  BigFloat(BigFloat&& other) noexcept;
  BigFloat& operator=(const BigFloat& other);
  BigFloat& operator=(BigFloat&& other) noexcept;
  ~BigFloat();

  mpfr_ptr get() noexcept { return value_; }
  mpfr_srcptr get() const noexcept { return value_; }
  mpfr_prec_t precision() const noexcept { return mpfr_get_prec(value_); }

  double to_double(mpfr_rnd_t rnd = MPFR_RNDN) const { return mpfr_get_d(value_, rnd); }
  // Exact: every finite binary float is a dyadic rational.
  Rational to_rational() const;

  int compare(const BigFloat& other) const { return mpfr_cmp(value_, other.value_); }
  int compare(const Rational& q) const;
  int sign() const { return mpfr_sgn(value_); }

 private:
  void release() noexcept;
  mpfr_t value_;
  bool owned_ = false;
};

inline bool operator<(const BigFloat& a, const BigFloat& b) { return a.compare(b) < 0; }
inline bool operator>(const BigFloat& a, const BigFloat& b) { return a.compare(b) > 0; }

// Natural log of a positive rational/integer, correct to well under 1e-15 relative.
double log_of(const Rational& q);
double log_of(const Integer& z);
BigFloat log_big(const Rational& q, mpfr_prec_t precision = kLogPrecision);

// mass / len^t evaluated at `precision` bits; 0 when mass == 0.
double mass_ratio(const Rational& mass, const Rational& len, double t,
                  mpfr_prec_t precision = kDefaultPrecision);

// Floor/ceil of a rational as an integer.
Integer floor_of(const Rational& q);
Integer ceil_of(const Rational& q);

// Integer power of a rational, exponent may be negative.
Rational pow_rational(const Rational& base, long exponent);

// 64-bit mixing used by every seeded stream (SplitMix64 finalizer).
std::uint64_t mix64(std::uint64_t x) noexcept;

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}
  std::uint64_t next() noexcept;
  // Uniform double in [0, 1).
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  // Uniform integer in [lo, hi].
  std::uint64_t between(std::uint64_t lo, std::uint64_t hi) noexcept;

 private:
  std::uint64_t state_;
};

// Stream key for (seed, level, index) style splitting.
std::uint64_t stream_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                         std::uint64_t c = 0) noexcept;

}  // namespace moran
