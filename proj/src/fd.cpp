#include "gelfand/fd.hpp"

#include <stdexcept>

namespace gelfand {

Eigen::VectorXd central_weights(int order, int m, double delta) {
  const int n = 2 * m + 1;
  if (order >= n) throw std::invalid_argument("central_weights: stencil too small");
  // Solve the Vandermonde moment conditions: sum_i w_i (i*delta)^k =
  // k! [k == order] for k = 0..n-1.
  Eigen::MatrixXd V(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  double fact = 1.0;
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) V(k, i) = std::pow((i - m) * delta, k);
    if (k > 0) fact *= k;
    if (k == order) rhs[k] = fact;
  }
  return V.fullPivLu().solve(rhs);
}

namespace {
double tensor_apply(const std::function<double(Vec2)>& f, Vec2 at, int a, int b,
                    double delta) {
  int ma = std::max(1, (a + 1) / 2), mb = std::max(1, (b + 1) / 2);
  if (a == 0) ma = 0;
  if (b == 0) mb = 0;
  Eigen::VectorXd wx = a ? central_weights(a, ma, delta) : Eigen::VectorXd::Ones(1);
  Eigen::VectorXd wy = b ? central_weights(b, mb, delta) : Eigen::VectorXd::Ones(1);
  double s = 0.0;
  for (int i = -ma; i <= ma; ++i)
    for (int j = -mb; j <= mb; ++j) {
      double w = wx[i + ma] * wy[j + mb];
      if (w == 0.0) continue;
      s += w * f({at.x + i * delta, at.y + j * delta});
    }
  return s;
}
}  // namespace

double fd_partial(const std::function<double(Vec2)>& f, Vec2 at, int a, int b,
                  double delta, double* noise) {
  double t1 = tensor_apply(f, at, a, b, delta);
  double t2 = tensor_apply(f, at, a, b, delta / 2);
  if (noise) *noise = std::abs(t2 - t1) / 3.0;
  return (4.0 * t2 - t1) / 3.0;
}

}  // namespace gelfand
