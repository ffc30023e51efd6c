#include "minsurf/jet.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace minsurf {

double Jet2::laplacian() const {
  double s = 0.0;
  for (std::size_t i = 0; i < dim(); ++i) s += hess(i, i);
  return s;
}

double Jet2::grad_norm() const {
  double s = 0.0;
  for (double g : grad_) s += g * g;
  return std::sqrt(s);
}

double Jet2::hess_operator_norm() const {
  const std::size_t n = dim();
  if (n == 0) return 0.0;
  if (n == 1) return std::abs(hess(0, 0));
  if (n == 2) {
    // closed-form eigenvalues of [[a, b], [b, c]]
    const double a = hess(0, 0), b = hess(0, 1), c = hess(1, 1);
    const double mean = 0.5 * (a + c);
    const double rad = std::hypot(0.5 * (a - c), b);
    return std::max(std::abs(mean + rad), std::abs(mean - rad));
  }
  // Power iteration on H^2 is enough for the small dimensions used here.
  std::vector<double> v(n, 1.0), w(n);
  double lambda = 0.0;
  for (int it = 0; it < 500; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = 0.0;
      for (std::size_t j = 0; j < n; ++j) w[i] += hess(i, j) * v[j];
    }
    double nrm = 0.0;
    for (double x : w) nrm += x * x;
    nrm = std::sqrt(nrm);
    if (nrm == 0.0) return 0.0;
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / nrm;
    if (std::abs(nrm - lambda) <= 1e-15 * nrm) return nrm;
    lambda = nrm;
  }
  return lambda;
}

double Jet2::hess_frobenius_norm() const {
  double s = 0.0;
  for (std::size_t i = 0; i < dim(); ++i)
    for (std::size_t j = 0; j < dim(); ++j) s += hess(i, j) * hess(i, j);
  return std::sqrt(s);
}

double Jet2::hess_form(const std::vector<double>& u, const std::vector<double>& v) const {
  assert(u.size() == dim() && v.size() == dim());
  double s = 0.0;
  for (std::size_t i = 0; i < dim(); ++i)
    for (std::size_t j = 0; j < dim(); ++j) s += u[i] * hess(i, j) * v[j];
  return s;
}

Jet2& Jet2::operator+=(const Jet2& o) {
  assert(o.dim() == dim());
  value_ += o.value_;
  for (std::size_t i = 0; i < grad_.size(); ++i) grad_[i] += o.grad_[i];
  for (std::size_t i = 0; i < hess_.size(); ++i) hess_[i] += o.hess_[i];
  return *this;
}

Jet2& Jet2::operator-=(const Jet2& o) {
  assert(o.dim() == dim());
  value_ -= o.value_;
  for (std::size_t i = 0; i < grad_.size(); ++i) grad_[i] -= o.grad_[i];
  for (std::size_t i = 0; i < hess_.size(); ++i) hess_[i] -= o.hess_[i];
  return *this;
}

Jet2& Jet2::operator*=(double s) {
  value_ *= s;
  for (double& g : grad_) g *= s;
  for (double& h : hess_) h *= s;
  return *this;
}

Jet2 operator*(const Jet2& a, const Jet2& b) {
  assert(a.dim() == b.dim());
  const std::size_t n = a.dim();
  Jet2 r(n, a.value() * b.value());
  for (std::size_t i = 0; i < n; ++i) r.grad(i) = a.value() * b.grad(i) + b.value() * a.grad(i);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j)
      r.hess(i, j) = a.value() * b.hess(i, j) + b.value() * a.hess(i, j) +
                     a.grad(i) * b.grad(j) + a.grad(j) * b.grad(i);
  return r;
}

Jet2 Jet2::compose(double f, double df, double ddf) const {
  const std::size_t n = dim();
  Jet2 r(n, f);
  for (std::size_t i = 0; i < n; ++i) r.grad(i) = df * grad(i);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j)
      r.hess(i, j) = df * hess(i, j) + ddf * grad(i) * grad(j);
  return r;
}

}  // namespace minsurf
