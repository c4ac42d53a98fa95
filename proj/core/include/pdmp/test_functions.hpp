#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "pdmp/phase.hpp"

namespace pdmp {

/// The seven observables used throughout the scaling experiments.
enum class TestFunctionId { f1, f2, f3, f4, f5, f6, f7 };

inline TestFunctionId parse_test_function(const std::string& name) {
  if (name.size() == 2 && name[0] == 'f' && name[1] >= '1' && name[1] <= '7') {
    return static_cast<TestFunctionId>(name[1] - '1');
  }
  throw std::invalid_argument("unknown test function: " + name);
}

inline std::string test_function_name(TestFunctionId id) {
  return "f" + std::to_string(static_cast<int>(id) + 1);
}

inline double evaluate(TestFunctionId id, const Vector& x) {
  switch (id) {
    case TestFunctionId::f1:
      return x[0];
    case TestFunctionId::f2:
      return x.sum();
    case TestFunctionId::f3: {
      double s = 0.0;
      for (Eigen::Index i = 0; i + 1 < x.size(); ++i) s += std::sin(x[i] + x[i + 1]);
      return s;
    }
    case TestFunctionId::f4:
      return x.norm();
    case TestFunctionId::f5:
      return 0.5 * x.squaredNorm();
    case TestFunctionId::f6:
      return x[0] * x[0];
    case TestFunctionId::f7:
      if (x.size() < 2) throw std::invalid_argument("f7 requires d >= 2");
      return x[0] * x[1];
  }
  throw std::logic_error("unreachable");
}

/// f1, f2, f5, f6, f7 are polynomials of degree <= 2 along straight lines,
/// so their segment time-integrals have closed forms.
inline bool has_closed_segment_integral(TestFunctionId id) {
  switch (id) {
    case TestFunctionId::f3:
    case TestFunctionId::f4:
      return false;
    default:
      return true;
  }
}

/// Integral of f(x + t v) for t in [0, len] along a linear segment.
inline double segment_integral(TestFunctionId id, const Vector& x, const Vector& v,
                               double len) {
  const double L = len, L2 = len * len, L3 = len * len * len;
  switch (id) {
    case TestFunctionId::f1:
      return x[0] * L + 0.5 * v[0] * L2;
    case TestFunctionId::f2:
      return x.sum() * L + 0.5 * v.sum() * L2;
    case TestFunctionId::f5:
      return 0.5 * (x.squaredNorm() * L + x.dot(v) * L2 + v.squaredNorm() * L3 / 3.0);
    case TestFunctionId::f6:
      return x[0] * x[0] * L + x[0] * v[0] * L2 + v[0] * v[0] * L3 / 3.0;
    case TestFunctionId::f7:
      return x[0] * x[1] * L + 0.5 * (x[0] * v[1] + x[1] * v[0]) * L2 +
             v[0] * v[1] * L3 / 3.0;
    default:
      throw std::invalid_argument("segment_integral: no closed form for " +
                                  test_function_name(id));
  }
}

}  // namespace pdmp
