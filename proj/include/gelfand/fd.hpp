#pragma once
// Central finite-difference stencils of arbitrary derivative order, with one
// Richardson extrapolation level, for scalar functions of the plane.

#include <Eigen/Dense>
#include <functional>

#include "gelfand/geometry.hpp"

namespace gelfand {

// Weights w[-m..m] (returned with index i+m) for d^o/ds^o at 0 on the stencil
// {-m..m} * delta, exact on polynomials of degree <= 2m.
Eigen::VectorXd central_weights(int order, int m, double delta);

// Partial d^a/dx^a d^b/dy^b f(at), tensor-product central differences with
// steps delta and delta/2 combined by Richardson. If noise is non-null it
// receives |T(delta/2) - T(delta)| / 3, a practical truncation+noise bound.
double fd_partial(const std::function<double(Vec2)>& f, Vec2 at, int a, int b,
                  double delta, double* noise = nullptr);

}  // namespace gelfand
