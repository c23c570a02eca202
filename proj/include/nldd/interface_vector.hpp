#pragma once

#include <Eigen/Dense>

namespace nldd {

struct PrimalTag {};
struct DualTag {};

/// Coefficients on the interface nodes of a Decomposition. The tag separates
/// traces (primal) from interface functionals (dual) so the two cannot be
/// mixed in arithmetic; the only bridge is pairing().
template <class Tag>
class InterfaceVector {
 public:
  InterfaceVector() = default;
  explicit InterfaceVector(Eigen::VectorXd values) : values_(std::move(values)) {}

  static InterfaceVector zeros(Eigen::Index n) { return InterfaceVector(Eigen::VectorXd::Zero(n)); }

  [[nodiscard]] const Eigen::VectorXd& values() const noexcept { return values_; }
  [[nodiscard]] Eigen::VectorXd& values() noexcept { return values_; }
  [[nodiscard]] Eigen::Index size() const noexcept { return values_.size(); }
  [[nodiscard]] double norm() const { return values_.norm(); }

  InterfaceVector& operator+=(const InterfaceVector& o) {
    values_ += o.values_;
    return *this;
  }
  InterfaceVector& operator-=(const InterfaceVector& o) {
    values_ -= o.values_;
    return *this;
  }
  InterfaceVector& operator*=(double a) {
    values_ *= a;
    return *this;
  }

  friend InterfaceVector operator+(InterfaceVector a, const InterfaceVector& b) { return a += b; }
  friend InterfaceVector operator-(InterfaceVector a, const InterfaceVector& b) { return a -= b; }
  friend InterfaceVector operator-(InterfaceVector a) { return a *= -1.0; }
  friend InterfaceVector operator*(double s, InterfaceVector a) { return a *= s; }
  friend InterfaceVector operator*(InterfaceVector a, double s) { return a *= s; }

  /// Bitwise equality of the coefficients.
  friend bool operator==(const InterfaceVector& a, const InterfaceVector& b) {
    return a.values_.size() == b.values_.size() && (a.values_.array() == b.values_.array()).all();
  }

 private:
  Eigen::VectorXd values_;
};

using Trace = InterfaceVector<PrimalTag>;
using Flux = InterfaceVector<DualTag>;

/// <psi, mu>: plain coefficient dot product.
[[nodiscard]] inline double pairing(const Flux& psi, const Trace& mu) { return psi.values().dot(mu.values()); }

}  // namespace nldd
