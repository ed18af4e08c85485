#pragma once

#include "vmsns/diagnostics.hpp"

namespace vmsns {

/// Decaying vortex built from the stream function
/// A/pi sin^2(pi x) sin^2(pi y) [sin^2(pi z)] in box coordinates; u_3 = 0.
VectorField vortex_velocity(int dim, double amplitude, const Box& box = Box::unit());

/// Steady polynomial solution u = curl-type field of A F(x) F(y) G(z),
/// F(s) = s^2 (1 - s)^2, G = 1 (2D) or F (3D), p = c (x - 1/2)(y - 1/2) in box
/// coordinates. Zero trace on the box, divergence free.
class ManufacturedSolution {
public:
  ManufacturedSolution(int dim, double amplitude, double pressure_scale, double nu, bool convection,
                       const Box& box = Box::unit());

  Vec3 velocity(const Point& x) const;
  std::array<Vec3, 3> gradient(const Point& x) const;
  Vec3 laplacian(const Point& x) const;
  double pressure(const Point& x) const;
  Vec3 pressure_gradient(const Point& x) const;
  /// -nu lap u + (u . grad) u + grad p (convection term dropped when disabled).
  Vec3 forcing(const Point& x) const;

  VectorField velocity_field() const;
  VectorField forcing_field() const;
  ExactSolution exact() const;

private:
  int dim_;
  double amplitude_;
  double pressure_scale_;
  double nu_;
  bool convection_;
  Box box_;
};

}  // namespace vmsns
