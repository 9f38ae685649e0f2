#pragma once

#include <optional>

namespace pbandit {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
double norm(Vec2 v);

// Row-major 2x2 matrix [[a, b], [c, d]].
struct Mat2 {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
};

Mat2 operator+(const Mat2& l, const Mat2& r);
Mat2 outer(Vec2 v);
Vec2 mul(const Mat2& m, Vec2 v);
double det(const Mat2& m);
double trace(const Mat2& m);
std::optional<Mat2> inverse(const Mat2& m);

// (A + u u^T)^{-1} from A^{-1} by the rank-one downdate of the inverse.
Mat2 sherman_morrison(const Mat2& a_inv, Vec2 u);

// (tr P^{-1})^{-1}; 0 for singular P ("dispersion undefined").
double trace_inv_metric(const Mat2& p);

// Closed-form eigenpairs of a symmetric matrix, descending eigenvalues.
// Eigenvectors are unit norm with the first nonzero component positive;
// for a degenerate (scalar) matrix the convention is v1=(0,1), v2=(1,0).
struct EigenPair {
  double lambda_max = 0.0;
  Vec2 v1;
  double lambda_min = 0.0;
  Vec2 v2;
};
EigenPair eigen2x2(const Mat2& s);

// lambda_max / lambda_min for symmetric positive definite input;
// +inf when singular or indefinite.
double cond_sym(const Mat2& s);

// Design matrix P_t = sum of (1, p_i)(1, p_i)^T with a maintained inverse.
// The inverse is seeded from the closed form once P becomes nonsingular and
// then kept current by Sherman-Morrison rank-one updates only.
struct DesignState {
  Mat2 p{};
  std::optional<Mat2> p_inv;
  int n_points = 0;
  double trace_metric = 0.0;
};

DesignState& update_design(DesignState& s, double price);

// Metric value that update_design(s, price) would produce, without commitment.
double metric_after_add(const DesignState& s, double price);

}  // namespace pbandit
