#include "mhd/fem/quadrature.hpp"

#include "mhd/errors.hpp"

#include <cmath>
#include <numbers>

namespace mhd::fem {

namespace {

void add_orbit3(TriangleRule& rule, double a, double w) {
  const double b = 1.0 - 2.0 * a;
  rule.points.push_back({b, a, a});
  rule.points.push_back({a, b, a});
  rule.points.push_back({a, a, b});
  for (int i = 0; i < 3; ++i) rule.weights.push_back(w);
}

void add_orbit6(TriangleRule& rule, double a, double b, double w) {
  const double c = 1.0 - a - b;
  rule.points.push_back({a, b, c});
  rule.points.push_back({b, a, c});
  rule.points.push_back({a, c, b});
  rule.points.push_back({c, a, b});
  rule.points.push_back({b, c, a});
  rule.points.push_back({c, b, a});
  for (int i = 0; i < 6; ++i) rule.weights.push_back(w);
}

TriangleRule make_degree5() {
  TriangleRule rule;
  rule.degree = 5;
  rule.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
  rule.weights.push_back(9.0 / 40.0);
  const double r15 = std::sqrt(15.0);
  add_orbit3(rule, (6.0 - r15) / 21.0, (155.0 - r15) / 1200.0);
  add_orbit3(rule, (6.0 + r15) / 21.0, (155.0 + r15) / 1200.0);
  return rule;
}

// Dunavant (1985), 12 points.
TriangleRule make_degree6() {
  TriangleRule rule;
  rule.degree = 6;
  add_orbit3(rule, 0.249286745170910421, 0.116786275726379366);
  add_orbit3(rule, 0.063089014491502228, 0.050844906370206817);
  add_orbit6(rule, 0.053145049844816947, 0.310352451033784405, 0.082851075618373575);
  return rule;
}

// Newton iteration on P_n; nodes mapped to [0,1].
LineRule make_gauss_legendre(int n) {
  LineRule rule;
  rule.degree = 2 * n - 1;
  for (int i = 1; i <= n; ++i) {
    double x = std::cos(std::numbers::pi * (i - 0.25) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.points.push_back(0.5 * (1.0 - x));
    rule.weights.push_back(1.0 / ((1.0 - x * x) * dp * dp));
  }
  return rule;
}

}  // namespace

const TriangleRule& triangle_rule_degree5() {
  static const TriangleRule rule = make_degree5();
  return rule;
}

const TriangleRule& triangle_rule_degree6() {
  static const TriangleRule rule = make_degree6();
  return rule;
}

const LineRule& gauss_legendre(int n) {
  static const std::array<LineRule, 5> rules = {make_gauss_legendre(1), make_gauss_legendre(2),
                                                make_gauss_legendre(3), make_gauss_legendre(4),
                                                make_gauss_legendre(5)};
  if (n < 1 || n > 5) throw InvalidArgument("gauss_legendre: n must be in 1..5");
  return rules[static_cast<std::size_t>(n - 1)];
}

CellFrame cell_frame(const Mesh& mesh, std::size_t cell) {
  CellFrame f;
  const Cell& t = mesh.cells()[cell];
  for (int i = 0; i < 3; ++i) f.x[i] = mesh.vertices()[t[i]];
  const double twice_area = (f.x[1].x() - f.x[0].x()) * (f.x[2].y() - f.x[0].y()) -
                            (f.x[2].x() - f.x[0].x()) * (f.x[1].y() - f.x[0].y());
  f.area = 0.5 * twice_area;
  for (int i = 0; i < 3; ++i) {
    const Point& a = f.x[(i + 1) % 3];
    const Point& b = f.x[(i + 2) % 3];
    f.grad_lambda[i] = Eigen::Vector2d(a.y() - b.y(), b.x() - a.x()) / twice_area;
  }
  return f;
}

P2Shape p2_shape(const CellFrame& frame, const std::array<double, 3>& l) {
  P2Shape s;
  const auto& g = frame.grad_lambda;
  for (int i = 0; i < 3; ++i) {
    s.value[i] = l[i] * (2.0 * l[i] - 1.0);
    s.grad[i] = (4.0 * l[i] - 1.0) * g[i];
  }
  for (int e = 0; e < 3; ++e) {
    const int i = e;
    const int j = (e + 1) % 3;
    s.value[3 + e] = 4.0 * l[i] * l[j];
    s.grad[3 + e] = 4.0 * (l[j] * g[i] + l[i] * g[j]);
  }
  return s;
}

}  // namespace mhd::fem
