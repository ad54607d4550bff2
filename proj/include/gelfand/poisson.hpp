#pragma once
// Dirichlet Poisson solves with the 5-point Laplacian and Shortley-Weller
// corrections at curved boundaries. A PoissonSolver owns the assembled
// -Laplace_h matrix and a factorization (sparse LU below 250k unknowns,
// BiCGSTAB + incomplete LU above), reused across right-hand sides.

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <functional>
#include <memory>

#include "gelfand/geometry.hpp"

namespace gelfand {

struct GridFunction {
  const Domain* dom = nullptr;
  Eigen::VectorXd interior;  // per interior node
  Eigen::VectorXd boundary;  // per boundary point (Dirichlet trace)

  GridFunction() = default;
  explicit GridFunction(const Domain& d)
      : dom(&d),
        interior(Eigen::VectorXd::Zero(d.n_interior())),
        boundary(Eigen::VectorXd::Zero(static_cast<int>(d.boundary_points.size()))) {}

  // Bilinear interpolation. All four surrounding nodes must be interior;
  // if not, falls back to the nearest interior node value.
  double eval(Vec2 p) const;
  double max_abs() const;
};

using ScalarField = std::function<double(Vec2)>;

// Boundary coupling of a Shortley-Weller row: the rhs of row `row` gains
// coef * g[bid] when the Dirichlet data is g.
struct BndCoef {
  int row;
  int bid;
  double coef;
};

class PoissonSolver {
 public:
  explicit PoissonSolver(const Domain& d);

  // Solve -Laplace_h u = f (interior values), u = g (boundary point values).
  Eigen::VectorXd solve(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const;
  double last_relative_residual() const { return last_rel_residual_; }
  const Eigen::SparseMatrix<double>& matrix() const { return A_; }
  bool direct() const { return use_direct_; }

 private:
  const Domain* dom_;
  Eigen::SparseMatrix<double> A_;  // -Laplace_h on interior unknowns
  std::vector<BndCoef> bnd_;
  bool use_direct_ = true;
  mutable Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
  using Bicgstab =
      Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>>;
  mutable std::unique_ptr<Bicgstab> iterative_;
  mutable bool factored_ = false;
  mutable double last_rel_residual_ = 0.0;
  void factor() const;
};

// Assemble -Laplace_h (shared by PoissonSolver and the Newton solver).
Eigen::SparseMatrix<double> assemble_neg_laplacian(
    const Domain& d, std::vector<BndCoef>* bnd_coefs = nullptr);

// High-level fronts. rhs is f in -Laplace u = f.
GridFunction poisson_solve(const Domain& d, const ScalarField& rhs,
                           const ScalarField& boundary);
GridFunction poisson_solve(const Domain& d, const Eigen::VectorXd& rhs,
                           const ScalarField& boundary);
GridFunction harmonic_extension(const Domain& d, const ScalarField& boundary);

// Projection onto zero boundary trace: u - harmonic_extension(u|boundary),
// with u sampled at interior nodes and boundary points.
GridFunction project(const Domain& d, const ScalarField& u);

}  // namespace gelfand
