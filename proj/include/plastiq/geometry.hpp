// Copyright 2026 The plastiq Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace plastiq {

/// Raised for precondition violations and malformed inputs.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2& operator-=(const Vec2& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr Vec2& operator*=(double s) {
    x *= s;
    y *= s;
    return *this;
  }
  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
constexpr Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }
constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
constexpr Vec2 operator/(const Vec2& a, double s) { return {a.x / s, a.y / s}; }

constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }
constexpr double norm2(const Vec2& a) { return dot(a, a); }

/// Counterclockwise rotation by a right angle: (a1, a2) -> (-a2, a1).
constexpr Vec2 perp(const Vec2& a) { return {-a.y, a.x}; }

inline Vec2 normalized(const Vec2& a) {
  const double n = norm(a);
  return n > 0.0 ? a / n : Vec2{};
}

inline Vec2 polar(double r, double theta) { return {r * std::cos(theta), r * std::sin(theta)}; }

/// Twice the signed area of (a, b, c); positive for counterclockwise order.
constexpr double orient(const Vec2& a, const Vec2& b, const Vec2& c) { return cross(b - a, c - a); }

inline double distance(const Vec2& a, const Vec2& b) { return norm(a - b); }

/// Distance from p to the closed segment [a, b].
inline double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  const double len2 = norm2(d);
  if (len2 == 0.0) return distance(p, a);
  double t = dot(p - a, d) / len2;
  t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
  return distance(p, a + t * d);
}

/// Intersection of the lines a + s*da and b + t*db. Returns false when the
/// lines are parallel to within `min_sin` (sine of the enclosed angle).
inline bool line_intersection(const Vec2& a, const Vec2& da, const Vec2& b, const Vec2& db, Vec2& out,
                              double min_sin = 1e-12) {
  const double den = cross(da, db);
  if (std::abs(den) <= min_sin * norm(da) * norm(db)) return false;
  const double s = cross(b - a, db) / den;
  out = a + s * da;
  return true;
}

/// Signed area of a simple polygon (positive if counterclockwise).
double polygon_area(const std::vector<Vec2>& poly);

/// Convex hull (Andrew's monotone chain), counterclockwise, no collinear points.
std::vector<Vec2> convex_hull(std::vector<Vec2> pts);

}  // namespace plastiq
