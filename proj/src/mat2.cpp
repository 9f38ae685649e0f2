#include "premium_bandit/mat2.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pbandit {

double norm(Vec2 v) { return std::hypot(v.x, v.y); }

Mat2 operator+(const Mat2& l, const Mat2& r) {
  return {l.a + r.a, l.b + r.b, l.c + r.c, l.d + r.d};
}

Mat2 outer(Vec2 v) {
  return {v.x * v.x, v.x * v.y, v.y * v.x, v.y * v.y};
}

Vec2 mul(const Mat2& m, Vec2 v) {
  return {m.a * v.x + m.b * v.y, m.c * v.x + m.d * v.y};
}

double det(const Mat2& m) { return m.a * m.d - m.b * m.c; }

double trace(const Mat2& m) { return m.a + m.d; }

namespace {

bool invertible(const Mat2& m) {
  const double scale = std::max(1.0, std::fabs(m.a) + std::fabs(m.b) +
                                         std::fabs(m.c) + std::fabs(m.d));
  return std::fabs(det(m)) > 1e-14 * scale * scale;
}

Vec2 orient(Vec2 v) {
  if (v.x < 0.0 || (v.x == 0.0 && v.y < 0.0)) return {-v.x, -v.y};
  return v;
}

}  // namespace

std::optional<Mat2> inverse(const Mat2& m) {
  if (!invertible(m)) return std::nullopt;
  const double inv_det = 1.0 / det(m);
  return Mat2{m.d * inv_det, -m.b * inv_det, -m.c * inv_det, m.a * inv_det};
}

Mat2 sherman_morrison(const Mat2& a_inv, Vec2 u) {
  const Vec2 w = mul(a_inv, u);
  const double denom = 1.0 + dot(u, w);
  const double s = 1.0 / denom;
  return {a_inv.a - s * w.x * w.x, a_inv.b - s * w.x * w.y,
          a_inv.c - s * w.y * w.x, a_inv.d - s * w.y * w.y};
}

double trace_inv_metric(const Mat2& p) {
  const auto inv = inverse(p);
  if (!inv) return 0.0;
  const double t = trace(*inv);
  if (!(t > 0.0)) return 0.0;
  return 1.0 / t;
}

EigenPair eigen2x2(const Mat2& s) {
  const double mean = 0.5 * (s.a + s.d);
  const double disc = std::hypot(0.5 * (s.a - s.d), s.b);
  EigenPair e;
  e.lambda_max = mean + disc;
  e.lambda_min = mean - disc;
  const double scale = std::max({1.0, std::fabs(s.a), std::fabs(s.d)});
  if (disc <= 1e-15 * scale) {
    e.v1 = {0.0, 1.0};
    e.v2 = {1.0, 0.0};
    return e;
  }
  if (std::fabs(s.b) <= 1e-15 * scale) {
    if (s.a >= s.d) {
      e.v1 = {1.0, 0.0};
      e.v2 = {0.0, 1.0};
    } else {
      e.v1 = {0.0, 1.0};
      e.v2 = {1.0, 0.0};
    }
    return e;
  }
  // Pick the numerically safer of the two closed-form eigenvector expressions.
  Vec2 v1;
  if (std::fabs(e.lambda_max - s.a) >= std::fabs(e.lambda_max - s.d)) {
    v1 = {s.b, e.lambda_max - s.a};
  } else {
    v1 = {e.lambda_max - s.d, s.b};
  }
  const double n1 = norm(v1);
  v1 = {v1.x / n1, v1.y / n1};
  e.v1 = orient(v1);
  e.v2 = orient(Vec2{-v1.y, v1.x});
  return e;
}

double cond_sym(const Mat2& s) {
  const auto e = eigen2x2(s);
  if (!(e.lambda_min > 0.0)) return std::numeric_limits<double>::infinity();
  return e.lambda_max / e.lambda_min;
}

DesignState& update_design(DesignState& s, double price) {
  const Vec2 p{1.0, price};
  if (s.p_inv) {
    s.p_inv = sherman_morrison(*s.p_inv, p);
  }
  s.p = s.p + outer(p);
  s.n_points += 1;
  if (!s.p_inv) {
    s.p_inv = inverse(s.p);  // nullopt while P is still singular
  }
  s.trace_metric = 0.0;
  if (s.p_inv) {
    const double t = trace(*s.p_inv);
    if (t > 0.0) s.trace_metric = 1.0 / t;
  }
  return s;
}

double metric_after_add(const DesignState& s, double price) {
  const Vec2 p{1.0, price};
  if (s.p_inv) {
    const Mat2 next = sherman_morrison(*s.p_inv, p);
    const double t = trace(next);
    return t > 0.0 ? 1.0 / t : 0.0;
  }
  return trace_inv_metric(s.p + outer(p));
}

}  // namespace pbandit
