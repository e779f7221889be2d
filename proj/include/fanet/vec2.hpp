#pragma once

#include <cmath>

namespace fanet {

// Plane vector in the flume's (x, z) coordinates, z positive upward.
struct Vec2 {
  double x = 0.0;
  double z = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, z + o.z}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, z - o.z}; }
  Vec2 operator*(double s) const { return {x * s, z * s}; }
  Vec2 operator-() const { return {-x, -z}; }
  Vec2& operator+=(Vec2 o) {
    x += o.x;
    z += o.z;
    return *this;
  }
  double dot(Vec2 o) const { return x * o.x + z * o.z; }
  double norm() const { return std::sqrt(x * x + z * z); }
};

inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.z}; }

}  // namespace fanet
