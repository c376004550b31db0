#include "puppy/rational.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>

#include "puppy/error.hpp"

namespace puppy {

Rational parse_decimal(std::string_view text) {
  std::size_t i = 0;
  const std::size_t n = text.size();
  auto fail = [&]() -> Rational {
    throw ParseError("malformed decimal: '" + std::string(text) + "'");
  };
  while (i < n && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  bool negative = false;
  if (i < n && (text[i] == '+' || text[i] == '-')) {
    negative = text[i] == '-';
    ++i;
  }
  std::string digits;
  long fraction_digits = 0;
  bool seen_digit = false;
  while (i < n && std::isdigit(static_cast<unsigned char>(text[i]))) {
    digits.push_back(text[i++]);
    seen_digit = true;
  }
  if (i < n && text[i] == '.') {
    ++i;
    while (i < n && std::isdigit(static_cast<unsigned char>(text[i]))) {
      digits.push_back(text[i++]);
      ++fraction_digits;
      seen_digit = true;
    }
  }
  if (!seen_digit) return fail();
  long exponent = 0;
  if (i < n && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    bool exp_negative = false;
    if (i < n && (text[i] == '+' || text[i] == '-')) {
      exp_negative = text[i] == '-';
      ++i;
    }
    bool exp_digit = false;
    while (i < n && std::isdigit(static_cast<unsigned char>(text[i]))) {
      exponent = exponent * 10 + (text[i++] - '0');
      exp_digit = true;
      if (exponent > 4000) return fail();
    }
    if (!exp_digit) return fail();
    if (exp_negative) exponent = -exponent;
  }
  while (i < n && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  if (i != n) return fail();

  mpz_class mantissa(digits, 10);
  const long scale = exponent - fraction_digits;
  mpz_class ten_pow;
  mpz_ui_pow_ui(ten_pow.get_mpz_t(), 10, static_cast<unsigned long>(scale < 0 ? -scale : scale));
  Rational q;
  if (scale >= 0) {
    q = Rational(mantissa * ten_pow);
  } else {
    q = Rational(mantissa, ten_pow);
  }
  q.canonicalize();
  if (negative) q = -q;
  return q;
}

std::string to_string(const Rational& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

std::string to_decimal(const Rational& q, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, q.get_d());
  return buf;
}

double to_double(const Rational& q) { return q.get_d(); }

Rational from_double(double v) {
  Rational q(v);
  q.canonicalize();
  return q;
}

Rational sqrt_rational(const Rational& q, unsigned bits) {
  if (sgn(q) <= 0) return Rational(0);
  if (mpz_perfect_square_p(q.get_num_mpz_t()) && mpz_perfect_square_p(q.get_den_mpz_t())) {
    mpz_class num, den;
    mpz_sqrt(num.get_mpz_t(), q.get_num_mpz_t());
    mpz_sqrt(den.get_mpz_t(), q.get_den_mpz_t());
    Rational r(num, den);
    r.canonicalize();
    return r;
  }
  mpf_class f(q, bits + 64);
  mpf_class root(0, bits + 64);
  mpf_sqrt(root.get_mpf_t(), f.get_mpf_t());
  Rational r;
  mpq_set_f(r.get_mpq_t(), root.get_mpf_t());
  r.canonicalize();
  return r;
}

}  // namespace puppy
