#pragma once

#include <cmath>
#include <limits>
#include <string>

namespace lds {

// Extended real in [0, +inf]. +inf is a tagged state, never a float
// sentinel, so monotone post-processing of rate curves stays well defined.
struct ExtReal {
  double value = 0.0;
  bool finite = true;

  ExtReal() = default;
  ExtReal(double v) : value(v), finite(true) {}  // NOLINT: implicit by design

  static ExtReal infinity() {
    ExtReal e;
    e.finite = false;
    e.value = std::numeric_limits<double>::infinity();
    return e;
  }

  double as_double() const {
    return finite ? value : std::numeric_limits<double>::infinity();
  }

  friend ExtReal operator+(const ExtReal& a, const ExtReal& b) {
    if (!a.finite || !b.finite) return infinity();
    return ExtReal(a.value + b.value);
  }
  friend ExtReal operator*(double c, const ExtReal& a) {
    if (!a.finite) return infinity();
    return ExtReal(c * a.value);
  }
  friend bool operator<(const ExtReal& a, const ExtReal& b) {
    if (!a.finite) return false;
    if (!b.finite) return true;
    return a.value < b.value;
  }
  friend bool operator<=(const ExtReal& a, const ExtReal& b) {
    return !(b < a);
  }
  friend bool operator==(const ExtReal& a, const ExtReal& b) {
    if (a.finite != b.finite) return false;
    return !a.finite || a.value == b.value;
  }
};

inline std::string to_string(const ExtReal& e) {
  return e.finite ? std::to_string(e.value) : "inf";
}

}  // namespace lds
