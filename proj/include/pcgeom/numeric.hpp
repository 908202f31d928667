#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace pcgeom {

// Raised for conditioning/divergence failures; the CLI maps it to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Raised for malformed configs/inputs; the CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Kahan compensated accumulator. Reductions that feed reported tables use this
// so results are stable to the last digits regardless of magnitude spread.
class KahanSum {
 public:
  void add(double x) {
    double y = x - c_;
    double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

inline double sqr(double x) { return x * x; }

}  // namespace pcgeom
