#pragma once

#include <cmath>
#include <limits>

namespace bpsim {

// Concave, non-decreasing utility h(x) of an admitted rate.
struct UtilitySpec {
  enum class Kind { none, log, linear };
  Kind kind = Kind::none;
  double weight = 1.0;  // linear slope; scales log as w * log(x)

  static UtilitySpec none() { return {}; }
  static UtilitySpec log(double w = 1.0) { return {Kind::log, w}; }
  static UtilitySpec linear(double w = 1.0) { return {Kind::linear, w}; }

  double value(double x) const {
    switch (kind) {
      case Kind::none: return 0.0;
      case Kind::log: return x > 0.0 ? weight * std::log(x) : -std::numeric_limits<double>::infinity();
      case Kind::linear: return weight * x;
    }
    return 0.0;
  }
  double derivative(double x) const {
    switch (kind) {
      case Kind::none: return 0.0;
      case Kind::log: return x > 0.0 ? weight / x : std::numeric_limits<double>::infinity();
      case Kind::linear: return weight;
    }
    return 0.0;
  }
};

}  // namespace bpsim
