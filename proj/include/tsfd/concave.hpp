#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "tsfd/errors.hpp"

namespace tsfd {

// Increasing concave shape function used for user fairness (f) and diversity
// (g). Two families:
//   shifted_log(s):  x -> log(x + s), domain x > -s
//   piecewise_linear(k, t): continuous concave piecewise-linear function with
//     strictly decreasing positive slopes k_1 > k_2 > ... and breakpoints
//     t_1 < t_2 < ..., anchored at value 0 at the first breakpoint. Domain is
//     all of R, which makes it usable where log would reject zero utilities.
class ConcaveFn {
 public:
  static ConcaveFn shifted_log(double shift) {
    ConcaveFn f;
    f.kind_ = Kind::shifted_log;
    f.shift_ = shift;
    return f;
  }

  static ConcaveFn piecewise_linear(std::vector<double> slopes,
                                    std::vector<double> breakpoints) {
    if (slopes.empty()) throw std::invalid_argument("piecewise_linear: no slopes");
    if (breakpoints.size() + 1 != slopes.size())
      throw std::invalid_argument("piecewise_linear: need one breakpoint less than slopes");
    for (std::size_t i = 0; i < slopes.size(); ++i) {
      if (!(slopes[i] > 0)) throw std::invalid_argument("piecewise_linear: slopes must be > 0");
      if (i > 0 && !(slopes[i] < slopes[i - 1]))
        throw std::invalid_argument("piecewise_linear: slopes must strictly decrease");
    }
    for (std::size_t i = 1; i < breakpoints.size(); ++i)
      if (!(breakpoints[i] > breakpoints[i - 1]))
        throw std::invalid_argument("piecewise_linear: breakpoints must strictly increase");
    ConcaveFn f;
    f.kind_ = Kind::piecewise_linear;
    f.slopes_ = std::move(slopes);
    f.breaks_ = std::move(breakpoints);
    // value at each breakpoint; anchored to 0 at the first one
    f.break_values_.assign(f.breaks_.size(), 0.0);
    for (std::size_t i = 1; i < f.breaks_.size(); ++i)
      f.break_values_[i] =
          f.break_values_[i - 1] + f.slopes_[i] * (f.breaks_[i] - f.breaks_[i - 1]);
    return f;
  }

  bool in_domain(double x) const {
    return kind_ == Kind::piecewise_linear || x + shift_ > 0.0;
  }

  // Open lower bound of the domain (-inf for piecewise linear).
  double domain_lower_bound() const {
    return kind_ == Kind::piecewise_linear
               ? -std::numeric_limits<double>::infinity()
               : -shift_;
  }

  double operator()(double x) const {
    if (kind_ == Kind::shifted_log) {
      if (!(x + shift_ > 0.0))
        throw DomainError("shifted_log: argument " + std::to_string(x) +
                          " outside domain x > " + std::to_string(-shift_));
      return std::log(x + shift_);
    }
    if (breaks_.empty()) return slopes_[0] * x;  // single slope, anchored at 0
    if (x <= breaks_.front()) return slopes_.front() * (x - breaks_.front());
    std::size_t j = segment(x);
    return break_values_[j] + slopes_[j + 1] * (x - breaks_[j]);
  }

  // Right derivative (the smaller slope at a breakpoint).
  double derivative(double x) const {
    if (kind_ == Kind::shifted_log) {
      if (!(x + shift_ > 0.0))
        throw DomainError("shifted_log: derivative outside domain");
      return 1.0 / (x + shift_);
    }
    if (breaks_.empty() || x < breaks_.front()) return slopes_.front();
    return slopes_[segment(x) + 1];
  }

  double inverse(double y) const {
    if (kind_ == Kind::shifted_log) return std::exp(y) - shift_;
    if (breaks_.empty()) return y / slopes_[0];
    if (y <= 0.0) return breaks_.front() + y / slopes_.front();
    std::size_t j = 0;
    while (j + 1 < break_values_.size() && break_values_[j + 1] <= y) ++j;
    return breaks_[j] + (y - break_values_[j]) / slopes_[j + 1];
  }

 private:
  enum class Kind { shifted_log, piecewise_linear };

  // largest j with breaks_[j] <= x (requires x > breaks_.front())
  std::size_t segment(double x) const {
    std::size_t j = 0;
    while (j + 1 < breaks_.size() && breaks_[j + 1] <= x) ++j;
    return j;
  }

  Kind kind_ = Kind::shifted_log;
  double shift_ = 0.0;
  std::vector<double> slopes_;
  std::vector<double> breaks_;
  std::vector<double> break_values_;
};

}  // namespace tsfd
