#pragma once

#include <cstddef>
#include <span>

#include "ogda/error.hpp"
#include "ogda/numerics.hpp"

namespace ogda {

/// z = (x, y) with the two blocks kept separate.
struct JointPoint {
  Vector x;
  Vector y;

  std::size_t size() const noexcept { return x.size() + y.size(); }

  Vector flatten() const {
    Vector z;
    z.reserve(size());
    z.insert(z.end(), x.begin(), x.end());
    z.insert(z.end(), y.begin(), y.end());
    return z;
  }

  static JointPoint from_flat(std::span<const double> z, std::size_t nx) {
    if (nx > z.size()) raise(ErrorCode::kDimensionMismatch, "split point exceeds flat length");
    return {Vector(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(nx)),
            Vector(z.begin() + static_cast<std::ptrdiff_t>(nx), z.end())};
  }

  friend bool operator==(const JointPoint&, const JointPoint&) = default;
};

inline double dist_sq(const JointPoint& a, const JointPoint& b) {
  return dist_sq(a.x, b.x) + dist_sq(a.y, b.y);
}

inline double dot(const JointPoint& a, const JointPoint& b) { return dot(a.x, b.x) + dot(a.y, b.y); }

inline JointPoint uniform_joint(std::size_t m, std::size_t n) {
  return {Vector(m, 1.0 / static_cast<double>(m)), Vector(n, 1.0 / static_cast<double>(n))};
}

}  // namespace ogda
