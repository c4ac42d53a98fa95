#pragma once

#include <Eigen/Core>
#include <stdexcept>

namespace pdmp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// State of both processes: position x and velocity v in R^d.
struct PhasePoint {
  Vector x;
  Vector v;

  PhasePoint() = default;
  PhasePoint(Vector x_, Vector v_) : x(std::move(x_)), v(std::move(v_)) {
    if (x.size() != v.size() || x.size() < 1) {
      throw std::invalid_argument("PhasePoint: x and v must have equal length d >= 1");
    }
  }

  Eigen::Index dim() const { return x.size(); }

  bool all_finite() const { return x.allFinite() && v.allFinite(); }
};

inline void require_dim(const PhasePoint& z, Eigen::Index d, const char* where) {
  if (z.dim() != d) {
    throw std::invalid_argument(std::string(where) + ": dimension mismatch");
  }
}

}  // namespace pdmp
