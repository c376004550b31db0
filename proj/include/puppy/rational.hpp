#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace puppy {

using Rational = mpq_class;

// Exact point with rational coordinates. All sign predicates on polygon
// geometry are evaluated on these.
struct RPoint {
  Rational x;
  Rational y;
};

inline RPoint operator-(const RPoint& a, const RPoint& b) { return {a.x - b.x, a.y - b.y}; }
inline RPoint operator+(const RPoint& a, const RPoint& b) { return {a.x + b.x, a.y + b.y}; }
inline RPoint operator*(const Rational& k, const RPoint& a) { return {k * a.x, k * a.y}; }
inline bool operator==(const RPoint& a, const RPoint& b) { return a.x == b.x && a.y == b.y; }

inline Rational dot(const RPoint& a, const RPoint& b) { return a.x * b.x + a.y * b.y; }
inline Rational cross(const RPoint& a, const RPoint& b) { return a.x * b.y - a.y * b.x; }

inline int sign(const Rational& q) { return sgn(q); }

// Parses a decimal literal ("-12", "3.25", "1e-3", "+0.5E2") into an exact
// rational. Throws ParseError on anything else.
Rational parse_decimal(std::string_view text);

// "p/q" (or "p" when q == 1); canonical, so equal rationals give equal strings.
std::string to_string(const Rational& q);

// Decimal rendering truncated to `digits` significant digits. Display only.
std::string to_decimal(const Rational& q, int digits = 12);

double to_double(const Rational& q);

// Exact conversion of a finite double.
Rational from_double(double v);

// sqrt(q) as a rational: exact when q is a perfect square of a rational,
// otherwise correct to roughly `bits` bits.
Rational sqrt_rational(const Rational& q, unsigned bits = 256);

}  // namespace puppy
