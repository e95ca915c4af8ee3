#include "levybsde/driver.hpp"

#include <cmath>

namespace levybsde {

DriverFunction zero_driver() { return DriverFunction{{}, 0.0, false, "zero"}; }

DriverFunction linear_driver(double rate) {
  return DriverFunction{[rate](double, const Vector& y, const Matrix&) -> Vector { return rate * y; },
                        std::abs(rate), false, "linear"};
}

DriverFunction sine_driver(double c) {
  return DriverFunction{
      [c](double, const Vector& y, const Matrix&) -> Vector { return c * y.array().sin().matrix(); },
      std::abs(c), false, "sine"};
}

DriverFunction mixed_driver(double a, double b) {
  return DriverFunction{[a, b](double, const Vector& y, const Matrix& z) -> Vector {
                          Vector out = a * y.array().sin().matrix();
                          if (z.cols() > 0) out += b * z.col(0).array().tanh().matrix();
                          return out;
                        },
                        std::abs(a) + std::abs(b), true, "mixed"};
}

DriverFunction shifted_driver(DriverFunction base, double shift) {
  auto inner = base.f;
  base.f = [inner, shift](double t, const Vector& y, const Matrix& z) -> Vector {
    Vector out = inner ? inner(t, y, z) : Vector::Zero(y.size());
    return out.array() + shift;
  };
  base.name += "+shift";
  return base;
}

}  // namespace levybsde
