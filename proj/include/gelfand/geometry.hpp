#pragma once
// Planar domains on a uniform Cartesian grid with Shortley-Weller boundary arms.
//
// A Domain owns the node classification of a rectangle of grid nodes:
// interior nodes carry unknowns, and each interior node has four "arms"
// (E,W,N,S) that either reach a neighbouring interior node at distance h or
// hit the boundary at distance theta*h (0 < theta <= 1), in which case the
// crossing point is stored and Dirichlet data is sampled there.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace gelfand {

struct Vec2 {
  double x = 0.0, y = 0.0;
  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}
  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm2() const { return x * x + y * y; }
  double norm() const { return std::sqrt(norm2()); }
};

enum class DomainKind { UnitDisk, Annulus, GridMask };

// One arm of the 5-point stencil. neighbor >= 0: interior neighbour index at
// distance h. neighbor < 0: the arm crosses the boundary; boundary_id indexes
// Domain::boundary_points and length is the distance to the crossing.
struct Arm {
  int neighbor = -1;
  int boundary_id = -1;
  double length = 0.0;
};

class PoissonSolver;  // forward (poisson.hpp)

class Domain {
 public:
  DomainKind kind = DomainKind::UnitDisk;
  double h = 0.0;
  int nx = 0, ny = 0;      // node counts of the bounding grid
  double x0 = 0.0, y0 = 0.0;  // position of grid node (0,0)
  bool analytic_regular_part = false;  // closed-form Green regular part available
  bool multiply_connected = false;
  double annulus_inner = 0.0;  // for Annulus kind

  std::vector<int> interior_of_node;              // nx*ny, -1 if not interior
  std::vector<int> node_of_interior;              // interior -> flat node index
  std::vector<std::array<Arm, 4>> arms;           // per interior node: E,W,N,S
  std::vector<Vec2> boundary_points;              // one per boundary arm

  static Domain unit_disk(double h, bool analytic_regular_part = true);
  static Domain annulus(double inner_radius, double h);
  // Mask of included nodes (row-major, ny rows of nx entries, nonzero = in).
  static Domain grid_mask(const std::vector<uint8_t>& mask, int nx, int ny,
                          double h, Vec2 node0);
  // [-1,1]^2 minus a centred square hole of half-width ~0.3 (grid-aligned),
  // translated so that `origin` (snapped to the grid) becomes the coordinate
  // origin.
  static Domain square_with_hole(double h, Vec2 origin = {0.0, 0.0},
                                 double hole_half_width = 0.3);
  // Unit square [0,1]^2 as a grid mask (used in tests).
  static Domain unit_square(double h);

  int n_interior() const { return static_cast<int>(node_of_interior.size()); }
  int flat(int i, int j) const { return j * nx + i; }
  Vec2 node_pos(int flat_idx) const {
    return {x0 + (flat_idx % nx) * h, y0 + (flat_idx / nx) * h};
  }
  Vec2 interior_pos(int k) const { return node_pos(node_of_interior[k]); }
  int interior_at(int i, int j) const {
    if (i < 0 || j < 0 || i >= nx || j >= ny) return -1;
    return interior_of_node[flat(i, j)];
  }
  // Nearest grid node to p.
  void nearest_node(Vec2 p, int& i, int& j) const {
    i = static_cast<int>(std::lround((p.x - x0) / h));
    j = static_cast<int>(std::lround((p.y - y0) / h));
  }
  double dist_to_boundary(Vec2 p) const;  // approximate (analytic for disk/annulus)
  bool contains(Vec2 p) const;

  // Cached linear solver for -Laplace_h on this domain (built on first use).
  const PoissonSolver& solver() const;

 private:
  // Level-set builder: phi < 0 inside. Used for UnitDisk/Annulus.
  static Domain from_level_set(DomainKind kind, double h,
                               const std::function<double(Vec2)>& phi,
                               double xmin, double xmax, double ymin, double ymax);
  mutable std::shared_ptr<PoissonSolver> solver_cache_;
  std::function<double(Vec2)> level_set_;  // empty for GridMask
  friend class PoissonSolver;
};

}  // namespace gelfand
