#include "mhd/bench.hpp"

#include <cmath>
#include <numbers>
#include <type_traits>

namespace mhd::bench {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

Vec2 Manufactured::u(double x, double y, double t) const {
  const double a = 1.0 + eps;
  return a * Vec2(std::pow(y, 5) + t * t, std::pow(x, 5) + t * t);
}

Vec2 Manufactured::B(double x, double y, double t) const {
  const double a = 1.0 + eps;
  return a * Vec2(std::sin(kPi * y) + t * t, std::sin(kPi * x) + t * t);
}

double Manufactured::p(double x, double y, double t) const {
  return 10.0 * (1.0 + eps) * (2.0 * x - 1.0) * (2.0 * y - 1.0) * (1.0 + t * t);
}

Vec2 Manufactured::forcing(double x, double y, double t) const {
  const double a = 1.0 + eps;
  const Vec2 uv = u(x, y, t);
  const Vec2 Bv = B(x, y, t);
  const Vec2 ut(2.0 * a * t, 2.0 * a * t);
  const Vec2 conv(uv.y() * 5.0 * a * std::pow(y, 4), uv.x() * 5.0 * a * std::pow(x, 4));
  const Vec2 lorentz(Bv.y() * a * kPi * std::cos(kPi * y), Bv.x() * a * kPi * std::cos(kPi * x));
  const Vec2 lap(20.0 * a * std::pow(y, 3), 20.0 * a * std::pow(x, 3));
  const double q = 10.0 * a * (1.0 + t * t);
  const Vec2 gp(q * 2.0 * (2.0 * y - 1.0), q * 2.0 * (2.0 * x - 1.0));
  return ut + conv - s * lorentz - nu * lap + gp;
}

Vec2 Manufactured::curl_forcing(double x, double y, double t) const {
  const double a = 1.0 + eps;
  const Vec2 uv = u(x, y, t);
  const Vec2 Bv = B(x, y, t);
  const Vec2 Bt(2.0 * a * t, 2.0 * a * t);
  const Vec2 adv(uv.y() * a * kPi * std::cos(kPi * y), uv.x() * a * kPi * std::cos(kPi * x));
  const Vec2 stretch(Bv.y() * 5.0 * a * std::pow(y, 4), Bv.x() * 5.0 * a * std::pow(x, 4));
  const Vec2 lap(-a * kPi * kPi * std::sin(kPi * y), -a * kPi * kPi * std::sin(kPi * x));
  return Bt + adv - stretch - gamma * lap;
}

MemberData Manufactured::member() const {
  MemberData m;
  m.nu = nu;
  m.gamma = gamma;
  const Manufactured self = *this;
  m.forcing = [self](double x, double y, double t) { return self.forcing(x, y, t); };
  m.curl_forcing = [self](double x, double y, double t) { return self.curl_forcing(x, y, t); };
  m.velocity_bc[tags::wall] = [self](double x, double y, double t) { return self.u(x, y, t); };
  m.magnetic_bc[tags::wall] = [self](double x, double y, double t) { return self.B(x, y, t); };
  return m;
}

MemberInitial Manufactured::initial() const {
  const Manufactured self = *this;
  MemberInitial init;
  init.u = [self](double x, double y, double t) { return self.u(x, y, t); };
  init.B = [self](double x, double y, double t) { return self.B(x, y, t); };
  init.p = [self](double x, double y, double t) { return self.p(x, y, t); };
  init.lambda = [](double, double, double) { return 0.0; };
  return init;
}

double manufactured_residual(const Manufactured& m, double x, double y, double t, double step) {
  const double k = step;
  // fourth-order central differences
  // results are materialized: an Eigen expression would outlive its operands
  auto d1 = [k](auto&& f) {
    using R = std::decay_t<decltype(f(0.0))>;
    return R((-f(2.0 * k) + 8.0 * f(k) - 8.0 * f(-k) + f(-2.0 * k)) / (12.0 * k));
  };
  auto d2 = [k](auto&& f) {
    using R = std::decay_t<decltype(f(0.0))>;
    return R((-f(2.0 * k) + 16.0 * f(k) - 30.0 * f(0.0) + 16.0 * f(-k) - f(-2.0 * k)) / (12.0 * k * k));
  };
  auto grad = [&](auto field) {
    Eigen::Matrix2d g;  // g(i, j) = d field_i / d x_j
    const Vec2 gx = d1([&](double e) -> Vec2 { return field(x + e, y, t); });
    const Vec2 gy = d1([&](double e) -> Vec2 { return field(x, y + e, t); });
    g.col(0) = gx;
    g.col(1) = gy;
    return g;
  };
  auto lap = [&](auto field) -> Vec2 {
    return d2([&](double e) -> Vec2 { return field(x + e, y, t); }) +
           d2([&](double e) -> Vec2 { return field(x, y + e, t); });
  };
  auto dt = [&](auto field) -> Vec2 { return d1([&](double e) -> Vec2 { return field(x, y, t + e); }); };

  auto U = [&m](double a, double b, double c) { return m.u(a, b, c); };
  auto Bf = [&m](double a, double b, double c) { return m.B(a, b, c); };
  const Vec2 uv = m.u(x, y, t);
  const Vec2 Bv = m.B(x, y, t);
  const Eigen::Matrix2d gu = grad(U);
  const Eigen::Matrix2d gB = grad(Bf);
  const Vec2 gp(d1([&](double e) { return m.p(x + e, y, t); }),
                d1([&](double e) { return m.p(x, y + e, t); }));

  const Vec2 momentum = dt(U) + gu * uv - m.s * (gB * Bv) - m.nu * lap(U) + gp - m.forcing(x, y, t);
  const Vec2 induction = dt(Bf) + gB * uv - gu * Bv - m.gamma * lap(Bf) - m.curl_forcing(x, y, t);
  return std::max(momentum.norm(), induction.norm());
}

MemberInitial stability_initial(double eps) {
  const double a = 1.0 + eps;
  MemberInitial init;
  init.u = [a](double x, double y, double) {
    return Vec2(x * x * (x - 1) * (x - 1) * y * (y - 1) * (2 * y - 1) * a,
                -y * y * (y - 1) * (y - 1) * x * (x - 1) * (2 * x - 1) * a);
  };
  init.B = [a](double x, double y, double) {
    return Vec2(std::sin(kPi * x) * std::cos(kPi * y) * a, -std::sin(kPi * y) * std::cos(kPi * x) * a);
  };
  init.p = [](double, double, double) { return 0.0; };
  init.lambda = [](double, double, double) { return 0.0; };
  return init;
}

MemberData channel_member(double eps, double nu, double gamma) {
  const double a = 1.0 + eps;
  MemberData m;
  m.nu = nu;
  m.gamma = gamma;
  const VectorFunction profile = [a](double, double y, double t) {
    return Vec2(a * 6.0 * y * (0.41 - y) / (0.41 * 0.41) * std::sin(kPi * t / 16.0), 0.0);
  };
  const VectorFunction zero = [](double, double, double) { return Vec2(0.0, 0.0); };
  const VectorFunction field = [a](double, double, double) { return Vec2(0.0, 0.1 * a); };
  m.velocity_bc = {{tags::wall, zero}, {tags::inflow, profile}, {tags::outflow, profile},
                   {tags::cylinder, zero}};
  m.magnetic_bc = {{tags::wall, field}, {tags::inflow, field}, {tags::outflow, field},
                   {tags::cylinder, field}};
  return m;
}

MemberInitial channel_initial(double eps) {
  const double a = 1.0 + eps;
  MemberInitial init;
  init.u = [](double, double, double) { return Vec2(0.0, 0.0); };
  init.B = [a](double, double, double) { return Vec2(0.0, 0.1 * a); };
  init.p = [](double, double, double) { return 0.0; };
  init.lambda = [](double, double, double) { return 0.0; };
  return init;
}

}  // namespace mhd::bench
