#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace minsurf {

/// Second-order Taylor data of a scalar field at a point: value, gradient and
/// Hessian with respect to `dim()` variables.
///
/// The Hessian is stored packed (upper triangle, row-major), so it is
/// symmetric by construction: `hess(i, j)` and `hess(j, i)` read the same slot.
class Jet2 {
public:
  Jet2() = default;
  explicit Jet2(std::size_t dim, double value = 0.0)
      : value_(value), grad_(dim, 0.0), hess_(dim * (dim + 1) / 2, 0.0) {}

  /// Jet of the coordinate function x_k.
  static Jet2 variable(std::size_t dim, std::size_t k, double value) {
    Jet2 j(dim, value);
    j.grad_[k] = 1.0;
    return j;
  }

  std::size_t dim() const noexcept { return grad_.size(); }

  double value() const noexcept { return value_; }
  double& value() noexcept { return value_; }

  double grad(std::size_t i) const { return grad_[i]; }
  double& grad(std::size_t i) { return grad_[i]; }
  const std::vector<double>& gradient() const noexcept { return grad_; }

  double hess(std::size_t i, std::size_t j) const { return hess_[slot(i, j)]; }
  double& hess(std::size_t i, std::size_t j) { return hess_[slot(i, j)]; }
  const std::vector<double>& packed_hessian() const noexcept { return hess_; }

  double laplacian() const;
  double grad_norm() const;
  /// Spectral norm of the Hessian (largest |eigenvalue|).
  double hess_operator_norm() const;
  double hess_frobenius_norm() const;
  /// H(u, v) for vectors of length dim().
  double hess_form(const std::vector<double>& u, const std::vector<double>& v) const;

  Jet2& operator+=(const Jet2& o);
  Jet2& operator-=(const Jet2& o);
  Jet2& operator*=(double s);

  friend Jet2 operator+(Jet2 a, const Jet2& b) { return a += b; }
  friend Jet2 operator-(Jet2 a, const Jet2& b) { return a -= b; }
  friend Jet2 operator*(Jet2 a, double s) { return a *= s; }
  friend Jet2 operator*(double s, Jet2 a) { return a *= s; }
  friend Jet2 operator-(Jet2 a) { return a *= -1.0; }
  friend Jet2 operator*(const Jet2& a, const Jet2& b);

  /// Composition f(a) given f, f', f'' at a.value().
  Jet2 compose(double f, double df, double ddf) const;

private:
  std::size_t slot(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    const std::size_t n = grad_.size();
    return i * n - i * (i - 1) / 2 + (j - i);
  }

  double value_ = 0.0;
  std::vector<double> grad_;
  std::vector<double> hess_;
};

}  // namespace minsurf
