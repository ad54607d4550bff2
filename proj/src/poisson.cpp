#include "gelfand/poisson.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <cmath>
#include <stdexcept>

namespace gelfand {

double GridFunction::eval(Vec2 p) const {
  const Domain& d = *dom;
  double fx = (p.x - d.x0) / d.h;
  double fy = (p.y - d.y0) / d.h;
  int i0 = static_cast<int>(std::floor(fx));
  int j0 = static_cast<int>(std::floor(fy));
  double tx = fx - i0, ty = fy - j0;
  int c00 = d.interior_at(i0, j0), c10 = d.interior_at(i0 + 1, j0);
  int c01 = d.interior_at(i0, j0 + 1), c11 = d.interior_at(i0 + 1, j0 + 1);
  if (c00 >= 0 && c10 >= 0 && c01 >= 0 && c11 >= 0) {
    return (1 - tx) * (1 - ty) * interior[c00] + tx * (1 - ty) * interior[c10] +
           (1 - tx) * ty * interior[c01] + tx * ty * interior[c11];
  }
  // Near the boundary: nearest interior node within a widening window.
  int bi, bj;
  d.nearest_node(p, bi, bj);
  for (int r = 0; r <= 4; ++r)
    for (int dj = -r; dj <= r; ++dj)
      for (int di = -r; di <= r; ++di) {
        if (std::max(std::abs(di), std::abs(dj)) != r) continue;
        int k = d.interior_at(bi + di, bj + dj);
        if (k >= 0) return interior[k];
      }
  return 0.0;  // outside the domain and far from it
}

double GridFunction::max_abs() const {
  double m = interior.size() ? interior.cwiseAbs().maxCoeff() : 0.0;
  if (boundary.size()) m = std::max(m, boundary.cwiseAbs().maxCoeff());
  return m;
}

Eigen::SparseMatrix<double> assemble_neg_laplacian(const Domain& d,
                                                   std::vector<BndCoef>* bnd_coefs) {
  const int n = d.n_interior();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(5) * n);
  for (int k = 0; k < n; ++k) {
    const auto& a = d.arms[k];
    double hE = a[0].length, hW = a[1].length, hN = a[2].length, hS = a[3].length;
    trip.emplace_back(k, k, 2.0 / (hE * hW) + 2.0 / (hN * hS));
    const double denomX = hE + hW, denomY = hN + hS;
    const double c[4] = {2.0 / (hE * denomX), 2.0 / (hW * denomX),
                         2.0 / (hN * denomY), 2.0 / (hS * denomY)};
    for (int s = 0; s < 4; ++s) {
      if (a[s].neighbor >= 0)
        trip.emplace_back(k, a[s].neighbor, -c[s]);
      else if (bnd_coefs)
        bnd_coefs->push_back({k, a[s].boundary_id, c[s]});
    }
  }
  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  return A;
}

PoissonSolver::PoissonSolver(const Domain& d) : dom_(&d) {
  A_ = assemble_neg_laplacian(d, &bnd_);
  use_direct_ = d.n_interior() <= 250000;
}

void PoissonSolver::factor() const {
  if (factored_) return;
  if (use_direct_) {
    lu_.compute(A_);
    if (lu_.info() != Eigen::Success)
      throw std::runtime_error("poisson: sparse LU factorization failed");
  } else {
    iterative_ = std::make_unique<Bicgstab>();
    iterative_->preconditioner().setDroptol(1e-5);
    iterative_->preconditioner().setFillfactor(30);
    iterative_->setTolerance(1e-12);
    iterative_->setMaxIterations(2000);
    iterative_->compute(A_);
    if (iterative_->info() != Eigen::Success)
      throw std::runtime_error("poisson: incomplete LU factorization failed");
  }
  factored_ = true;
}

Eigen::VectorXd PoissonSolver::solve(const Eigen::VectorXd& f,
                                     const Eigen::VectorXd& g) const {
  factor();
  Eigen::VectorXd b = f;
  for (const BndCoef& bc : bnd_) b[bc.row] += bc.coef * g[bc.bid];
  Eigen::VectorXd u;
  if (use_direct_) {
    u = lu_.solve(b);
  } else {
    // Preconditioned BiCGSTAB; the incomplete factorization is reused across
    // right-hand sides.
    u = iterative_->solve(b);
  }
  double bn = b.norm();
  last_rel_residual_ = bn > 0 ? (A_ * u - b).norm() / bn : (A_ * u).norm();
  if (!(last_rel_residual_ < 1e-8))
    throw std::runtime_error("poisson: linear solve did not converge");
  return u;
}

GridFunction poisson_solve(const Domain& d, const Eigen::VectorXd& rhs,
                           const ScalarField& boundary) {
  GridFunction u(d);
  for (size_t b = 0; b < d.boundary_points.size(); ++b)
    u.boundary[static_cast<int>(b)] = boundary(d.boundary_points[b]);
  u.interior = d.solver().solve(rhs, u.boundary);
  return u;
}

GridFunction poisson_solve(const Domain& d, const ScalarField& rhs,
                           const ScalarField& boundary) {
  Eigen::VectorXd f(d.n_interior());
  for (int k = 0; k < d.n_interior(); ++k) f[k] = rhs(d.interior_pos(k));
  return poisson_solve(d, f, boundary);
}

GridFunction harmonic_extension(const Domain& d, const ScalarField& boundary) {
  return poisson_solve(d, Eigen::VectorXd::Zero(d.n_interior()), boundary);
}

GridFunction project(const Domain& d, const ScalarField& u) {
  GridFunction hext = harmonic_extension(d, u);
  GridFunction p(d);
  for (int k = 0; k < d.n_interior(); ++k)
    p.interior[k] = u(d.interior_pos(k)) - hext.interior[k];
  // boundary trace of the projection is zero by construction
  return p;
}

}  // namespace gelfand
