#include "moran/numeric.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <utility>

#include "moran/error.hpp"

namespace moran {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_spec: return "invalid-spec";
    case ErrorKind::not_evaluable: return "not-evaluable";
    case ErrorKind::inconsistent: return "inconsistent";
    case ErrorKind::resource: return "resource";
    case ErrorKind::parse: return "parse";
    case ErrorKind::domain: return "domain";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::inapplicable: return "inapplicable";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::precision: return "precision";
    case ErrorKind::regime: return "regime";
    case ErrorKind::not_found: return "not-found";
    case ErrorKind::cap_exceeded: return "cap-exceeded";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

std::string to_string(const Rational& q) {
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char ch : s) {
    if (!std::isdigit(static_cast<unsigned char>(ch))) return false;
  }
  return true;
}

[[noreturn]] void bad_number(std::string_view text) {
  throw Error(ErrorKind::parse, "not a rational number: '" + std::string(text) + "'");
}

Integer parse_signed_integer(std::string_view s, std::string_view whole) {
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  if (!all_digits(s)) bad_number(whole);
  Integer z(std::string(s), 10);
  return negative ? Integer(-z) : z;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  std::string_view s = text;
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (s.empty()) bad_number(text);

  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    Integer num = parse_signed_integer(s.substr(0, slash), text);
    std::string_view den_text = s.substr(slash + 1);
    if (!all_digits(den_text)) bad_number(text);
    Integer den(std::string(den_text), 10);
    if (den == 0) bad_number(text);
    Rational q(num, den);
    q.canonicalize();
    return q;
  }

  // Decimal with optional exponent.
  bool negative = false;
  if (s.front() == '-' || s.front() == '+') {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  long exponent = 0;
  if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
    Integer ez = parse_signed_integer(s.substr(e + 1), text);
    if (!ez.fits_slong_p()) bad_number(text);
    exponent = ez.get_si();
    s = s.substr(0, e);
  }
  std::string digits;
  if (auto dot = s.find('.'); dot != std::string_view::npos) {
    std::string_view ip = s.substr(0, dot);
    std::string_view fp = s.substr(dot + 1);
    if ((!ip.empty() && !all_digits(ip)) || (!fp.empty() && !all_digits(fp)) ||
        (ip.empty() && fp.empty())) {
      bad_number(text);
    }
    digits = std::string(ip) + std::string(fp);
    exponent -= static_cast<long>(fp.size());
  } else {
    if (!all_digits(s)) bad_number(text);
    digits = std::string(s);
  }
  Rational q{Integer(digits, 10)};
  q *= pow_rational(Rational(10), exponent);
  if (negative) q = -q;
  return q;
}

Rational rational_from_double(double x) {
  if (!std::isfinite(x)) throw Error(ErrorKind::domain, "non-finite value");
  Rational q;
  mpq_set_d(q.get_mpq_t(), x);
  return q;
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// --- BigFloat --------------------------------------------------------------

BigFloat::BigFloat(mpfr_prec_t precision) {
  mpfr_init2(value_, precision);
  mpfr_set_zero(value_, 1);
  owned_ = true;
}

BigFloat::BigFloat(const Rational& q, mpfr_prec_t precision, mpfr_rnd_t rnd) : BigFloat(precision) {
  mpfr_set_q(value_, q.get_mpq_t(), rnd);
}

BigFloat::BigFloat(double x, mpfr_prec_t precision) : BigFloat(precision) {
  mpfr_set_d(value_, x, MPFR_RNDN);
}

BigFloat::BigFloat(const BigFloat& other) : BigFloat(other.precision()) {
  mpfr_set(value_, other.value_, MPFR_RNDN);
}

BigFloat::BigFloat(BigFloat&& other) noexcept : BigFloat(other) {}

BigFloat& BigFloat::operator=(const BigFloat& other) {
  if (this != &other) {
    mpfr_set_prec(value_, other.precision());
    mpfr_set(value_, other.value_, MPFR_RNDN);
  }
  return *this;
}

BigFloat& BigFloat::operator=(BigFloat&& other) noexcept {
  if (this != &other) mpfr_swap(value_, other.value_);
  return *this;
}

BigFloat::~BigFloat() { release(); }

void BigFloat::release() noexcept {
  if (owned_) mpfr_clear(value_);
  owned_ = false;
}

Rational BigFloat::to_rational() const {
  if (!mpfr_number_p(value_)) throw Error(ErrorKind::precision, "non-finite float");
  Rational q;
  mpfr_get_q(q.get_mpq_t(), value_);
  return q;
}

int BigFloat::compare(const Rational& q) const {
  return mpfr_cmp_q(value_, q.get_mpq_t());
}

// --- helpers ---------------------------------------------------------------

BigFloat log_big(const Rational& q, mpfr_prec_t precision) {
  if (sgn(q) <= 0) throw Error(ErrorKind::domain, "log of non-positive value " + to_string(q));
  BigFloat x(q, precision + 32);
  BigFloat out(precision);
  mpfr_log(out.get(), x.get(), MPFR_RNDN);
  return out;
}

double log_of(const Rational& q) { return log_big(q).to_double(); }

double log_of(const Integer& z) { return log_of(Rational(z)); }

double mass_ratio(const Rational& mass, const Rational& len, double t, mpfr_prec_t precision) {
  if (sgn(mass) == 0) return 0.0;
  if (t == 0.0) return BigFloat(mass, precision).to_double();
  if (sgn(len) <= 0) throw Error(ErrorKind::domain, "window of zero length with positive mass");
  BigFloat lg = log_big(len, precision);
  BigFloat tt(t, precision);
  mpfr_mul(lg.get(), lg.get(), tt.get(), MPFR_RNDN);
  mpfr_exp(lg.get(), lg.get(), MPFR_RNDN);
  BigFloat m(mass, precision);
  mpfr_div(m.get(), m.get(), lg.get(), MPFR_RNDN);
  return m.to_double();
}

Integer floor_of(const Rational& q) {
  Integer z;
  mpz_fdiv_q(z.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return z;
}

Integer ceil_of(const Rational& q) {
  Integer z;
  mpz_cdiv_q(z.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return z;
}

Rational pow_rational(const Rational& base, long exponent) {
  Integer num, den;
  unsigned long e = static_cast<unsigned long>(exponent < 0 ? -exponent : exponent);
  mpz_pow_ui(num.get_mpz_t(), base.get_num_mpz_t(), e);
  mpz_pow_ui(den.get_mpz_t(), base.get_den_mpz_t(), e);
  if (exponent < 0) std::swap(num, den);
  if (den == 0) throw Error(ErrorKind::domain, "zero raised to a negative power");
  Rational q(num, den);
  q.canonicalize();
  return q;
}

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t SplitMix64::next() noexcept {
  state_ += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t SplitMix64::between(std::uint64_t lo, std::uint64_t hi) noexcept {
  const std::uint64_t span = hi - lo + 1;
  if (span == 0) return next();
  // Rejection sampling keeps the draw exactly uniform.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % span);
  std::uint64_t x;
  do {
    x = next();
  } while (x >= limit);
  return lo + x % span;
}

std::uint64_t stream_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                         std::uint64_t c) noexcept {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ (a + 0x632BE59BD9B4E019ULL));
  h = mix64(h ^ (b + 0x8CB92BA72F3D8DD7ULL));
  h = mix64(h ^ (c + 0xD6E8FEB86659FD93ULL));
  return h;
}

}  // namespace moran
