#pragma once

#include <functional>
#include <string>

#include "levybsde/levy_model.hpp"

namespace levybsde {

/// f(t, y, z) with y of length m and z an m x K table of orthonormal
/// coefficients, one column per kept basis index.
struct DriverFunction {
  std::function<Vector(double, const Vector&, const Matrix&)> f;
  double lipschitz = 0.0;
  bool uses_z = false;
  std::string name;

  bool is_zero() const noexcept { return !f; }
  Vector operator()(double t, const Vector& y, const Matrix& z) const {
    return f ? f(t, y, z) : Vector::Zero(y.size());
  }
};

DriverFunction zero_driver();
/// f = rate * y.
DriverFunction linear_driver(double rate);
/// f = c sin(y) componentwise.
DriverFunction sine_driver(double c);
/// f = a sin(y) + b tanh(z_1), z_1 the first kept coefficient.
DriverFunction mixed_driver(double a, double b);
/// f + shift, for perturbation studies.
DriverFunction shifted_driver(DriverFunction base, double shift);

}  // namespace levybsde
