#include "vmsns/scenario.hpp"

#include "vmsns/errors.hpp"

#include <cmath>
#include <numbers>

namespace vmsns {

namespace {

struct Poly {
  double f, d1, d2, d3;
};

Poly profile(double s) {
  const double t = 1.0 - s;
  return {s * s * t * t, 2.0 * s * t * (1.0 - 2.0 * s), 2.0 - 12.0 * s + 12.0 * s * s, -12.0 + 24.0 * s};
}

}  // namespace

VectorField vortex_velocity(int dim, double amplitude, const Box& box) {
  if (dim != 2 && dim != 3) throw DimensionError("vortex needs dim 2 or 3");
  constexpr double pi = std::numbers::pi;
  return [=](const Point& x) {
    double s[3];
    double len[3];
    for (int d = 0; d < 3; ++d) {
      len[d] = box.upper[d] - box.lower[d];
      s[d] = d < dim ? (x[d] - box.lower[d]) / len[d] : 0.0;
    }
    const double g = dim == 3 ? std::sin(pi * s[2]) * std::sin(pi * s[2]) : 1.0;
    const double sx = std::sin(pi * s[0]), sy = std::sin(pi * s[1]);
    return Vec3{amplitude * sx * sx * std::sin(2.0 * pi * s[1]) / len[1] * g,
                -amplitude * std::sin(2.0 * pi * s[0]) * sy * sy / len[0] * g, 0.0};
  };
}

ManufacturedSolution::ManufacturedSolution(int dim, double amplitude, double pressure_scale, double nu,
                                           bool convection, const Box& box)
    : dim_(dim), amplitude_(amplitude), pressure_scale_(pressure_scale), nu_(nu), convection_(convection), box_(box) {
  if (dim != 2 && dim != 3) throw DimensionError("manufactured solution needs dim 2 or 3");
}

Vec3 ManufacturedSolution::velocity(const Point& x) const {
  const double lx = box_.upper[0] - box_.lower[0], ly = box_.upper[1] - box_.lower[1];
  const Poly fx = profile((x[0] - box_.lower[0]) / lx);
  const Poly fy = profile((x[1] - box_.lower[1]) / ly);
  const double g = dim_ == 3 ? profile((x[2] - box_.lower[2]) / (box_.upper[2] - box_.lower[2])).f : 1.0;
  return {amplitude_ * fx.f * fy.d1 / ly * g, -amplitude_ * fx.d1 / lx * fy.f * g, 0.0};
}

std::array<Vec3, 3> ManufacturedSolution::gradient(const Point& x) const {
  const double lx = box_.upper[0] - box_.lower[0], ly = box_.upper[1] - box_.lower[1];
  const Poly fx = profile((x[0] - box_.lower[0]) / lx);
  const Poly fy = profile((x[1] - box_.lower[1]) / ly);
  double g = 1.0, gz = 0.0;
  if (dim_ == 3) {
    const double lz = box_.upper[2] - box_.lower[2];
    const Poly fz = profile((x[2] - box_.lower[2]) / lz);
    g = fz.f;
    gz = fz.d1 / lz;
  }
  const double a = amplitude_;
  std::array<Vec3, 3> out{};
  out[0] = {a * fx.d1 / lx * fy.d1 / ly * g, a * fx.f * fy.d2 / (ly * ly) * g, a * fx.f * fy.d1 / ly * gz};
  out[1] = {-a * fx.d2 / (lx * lx) * fy.f * g, -a * fx.d1 / lx * fy.d1 / ly * g, -a * fx.d1 / lx * fy.f * gz};
  return out;
}

Vec3 ManufacturedSolution::laplacian(const Point& x) const {
  const double lx = box_.upper[0] - box_.lower[0], ly = box_.upper[1] - box_.lower[1];
  const Poly fx = profile((x[0] - box_.lower[0]) / lx);
  const Poly fy = profile((x[1] - box_.lower[1]) / ly);
  double g = 1.0, gzz = 0.0;
  if (dim_ == 3) {
    const double lz = box_.upper[2] - box_.lower[2];
    const Poly fz = profile((x[2] - box_.lower[2]) / lz);
    g = fz.f;
    gzz = fz.d2 / (lz * lz);
  }
  const double a = amplitude_;
  const double l1 = a * (fx.d2 / (lx * lx) * fy.d1 / ly * g + fx.f * fy.d3 / (ly * ly * ly) * g + fx.f * fy.d1 / ly * gzz);
  const double l2 =
      -a * (fx.d3 / (lx * lx * lx) * fy.f * g + fx.d1 / lx * fy.d2 / (ly * ly) * g + fx.d1 / lx * fy.f * gzz);
  return {l1, l2, 0.0};
}

double ManufacturedSolution::pressure(const Point& x) const {
  const double sx = (x[0] - box_.lower[0]) / (box_.upper[0] - box_.lower[0]);
  const double sy = (x[1] - box_.lower[1]) / (box_.upper[1] - box_.lower[1]);
  return pressure_scale_ * (sx - 0.5) * (sy - 0.5);
}

Vec3 ManufacturedSolution::pressure_gradient(const Point& x) const {
  const double lx = box_.upper[0] - box_.lower[0], ly = box_.upper[1] - box_.lower[1];
  const double sx = (x[0] - box_.lower[0]) / lx;
  const double sy = (x[1] - box_.lower[1]) / ly;
  return {pressure_scale_ * (sy - 0.5) / lx, pressure_scale_ * (sx - 0.5) / ly, 0.0};
}

Vec3 ManufacturedSolution::forcing(const Point& x) const {
  const Vec3 lap = laplacian(x);
  const Vec3 gp = pressure_gradient(x);
  Vec3 f{};
  for (int c = 0; c < 3; ++c) f[c] = -nu_ * lap[c] + gp[c];
  if (convection_) {
    const Vec3 u = velocity(x);
    const auto g = gradient(x);
    for (int c = 0; c < dim_; ++c)
      for (int d = 0; d < dim_; ++d) f[c] += u[d] * g[c][d];
  }
  if (dim_ == 2) f[2] = 0.0;
  return f;
}

VectorField ManufacturedSolution::velocity_field() const {
  return [self = *this](const Point& x) { return self.velocity(x); };
}

VectorField ManufacturedSolution::forcing_field() const {
  return [self = *this](const Point& x) { return self.forcing(x); };
}

ExactSolution ManufacturedSolution::exact() const {
  ExactSolution e;
  e.velocity = velocity_field();
  e.gradient = [self = *this](const Point& x) { return self.gradient(x); };
  e.pressure = [self = *this](const Point& x) { return self.pressure(x); };
  return e;
}

}  // namespace vmsns
