#pragma once
// The approximate solution W: projected bubble plus the scaled local and
// global corrections. Everything evaluated pointwise (off-mesh): the bubble,
// the kernel functions and the corrections are analytic, the harmonic
// extension of the bubble trace is a Poisson series on the disk, and only the
// smooth auxiliary fields come from the mesh. The residual Lap W + rho^2 Ve^W
// is assembled from exact Laplacians of the pieces, so its small near-peak
// values survive the cancellation of the large individual terms. Quadrature
// of peaked integrands uses a log-polar midpoint patch around the bubble plus
// mesh-cell midpoints outside.

#include <array>
#include <functional>

#include "gelfand/corrections.hpp"
#include "gelfand/finitedim.hpp"

namespace gelfand {

// Harmonic function on the unit disk represented by the Fourier coefficients
// of its boundary trace (Poisson kernel in series form). Exactly harmonic.
struct DiskHarmonic {
  Eigen::VectorXd ca, cb;  // cos/sin coefficients; ca[0] is the mean

  double eval(Vec2 p) const;
  static DiskHarmonic from_trace(const std::function<double(double)>& trace,
                                 int modes = 320, int samples = 4096);
};

struct Ansatz {
  const ReducedFunctional* rf = nullptr;
  const RadialProfile* profile = nullptr;
  double rho = 0.0, tau = 0.0;
  Vec2 xi, xi0;
  bool with_corrections = true;
  bool scaled_xi = true;
  CorrectionBundle bundle;

  bool spectral = false;  // unit disk: series harmonic extension of the trace
  DiskHarmonic hU_disk;
  GridFunction hU_grid;   // fallback on mask domains

  HomogeneousPoly P;      // leading jet polynomial of the reduced functional
  Vec2 eta0;              // forcing vector of the reduced equation

  GridFunction PU, local_correction, global_correction, W;  // nodal fields
};

// Nodal bubble U(x) = log(8 rho^2 tau^2/(rho^2 tau^2 + |x-xi|^2)^2).
// Requires rho tau >= 4h (the nodal field is meaningless otherwise).
GridFunction build_bubble(double rho, double tau, Vec2 xi, const Domain& d);

// xi = rho^{2/N} log^{1/N}(1/rho) xi0 when scale_xi, else xi = xi0 verbatim.
// tau comes from the correction bundle's fixed point; corrections=false keeps
// W = PU (the bundle is still built, for tau and for diagnostics).
Ansatz assemble_ansatz(const ReducedFunctional& rf, const RadialProfile& profile,
                       double rho, Vec2 xi0, bool corrections = true,
                       bool scale_xi = true);

double eval_U(const Ansatz& a, Vec2 x);
double eval_PU(const Ansatz& a, Vec2 x);
double eval_W(const Ansatz& a, Vec2 x);

// psi_i(x) = (x_i - xi_i)/(rho^2 tau^2 + |x-xi|^2).
double eval_psi(const Ansatz& a, int i, Vec2 x);

struct KernelPair {
  const Ansatz* a = nullptr;
  std::array<GridFunction, 2> psi, p_psi;  // nodal
  std::array<GridFunction, 2> hpsi;        // harmonic parts (nodal)
  bool spectral = false;                   // harmonic parts as Poisson series
  std::array<DiskHarmonic, 2> hpsi_disk;
  std::array<double, 2> h1_norm2{};        // H^1_0 norms squared of P psi_i
};
KernelPair make_kernel_pair(const Ansatz& a);
double eval_p_psi(const KernelPair& k, int i, Vec2 x);

// Signed integral over the domain of a function concentrated at xi. Patch
// radius min(patch_factor * rho tau, dist(xi, boundary)/2).
double integrate_peaked(const Ansatz& a, const std::function<double(Vec2)>& f,
                        double patch_factor = 20.0);
// L^p norm with the same quadrature.
double lp_norm_peaked(const Ansatz& a, const std::function<double(Vec2)>& f,
                      double p);

// Pointwise residual Lap W + rho^2 V e^W.
double residual_at(const Ansatz& a, Vec2 x);

struct ResidualReport {
  double p = 0.0;
  double lp = 0.0;    // ||R||_p
  GridFunction field; // nodal values
};
ResidualReport residual(const Ansatz& a, double p);

// R/e^U at x against its leading structure (1/2pi)<grad P(xi), x-xi> +
// Theta(x-xi), with the error envelope of the expansion.
struct StructureSample {
  double actual = 0.0;
  double main = 0.0;
  double envelope = 0.0;
  double ratio = 0.0;  // |actual - main| / envelope
};
StructureSample residual_structure(const Ansatz& a, Vec2 x);

// Both sides of the W - U expansion through the regular part, log rho, the
// local correction and Theta, with its error envelope.
struct WuSample {
  double lhs = 0.0, rhs = 0.0, envelope = 0.0;
};
WuSample wu_expansion(const Ansatz& a, Vec2 x);

struct KernelIntegralReport {
  Eigen::Matrix2d moments;  // int e^U (x_i - xi_i) psi_j
  Vec2 log_moments;         // int e^U (x_i - xi_i) log(1/|x-xi|) psi_i
};
KernelIntegralReport kernel_integrals(const Ansatz& a);
// int e^U |x-xi|^s |psi_j|.
double kernel_abs_moment(const Ansatz& a, double s, int j);

struct ReducedEquationCheck {
  Vec2 pair;    // int R P psi_i
  Vec2 target;  // grad P(xi) - rho^2 log(1/rho) eta0
  double rel_error = 0.0;
};
ReducedEquationCheck reduced_equation_check(const Ansatz& a, const KernelPair& k);

struct LinearizedDiagnostic {
  std::array<double, 3> smallest{};  // three smallest singular values of L
  double sigma_restricted = 0.0;     // smallest on the complement of span{P psi}
  double projection_defect = 0.0;    // discrete -Lap P psi_i vs e^U psi_i
};
// Needs a modest mesh (dense-ish eigensolve): at most ~40k interior nodes.
LinearizedDiagnostic linearized_diagnostic(const Ansatz& a, const KernelPair& k);

// N(phi) = rho^2 V e^W (e^phi - 1 - phi), nodewise.
GridFunction nonlinear_term(const Ansatz& a, const GridFunction& phi);

}  // namespace gelfand
