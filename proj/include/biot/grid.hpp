#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <vector>

namespace biot {

class GridError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Uniform staggered grid on (0,Lx) or (0,Lx)x(0,Ly). Pressure and the
// stored stress components live at cell centers; velocity and the
// auxiliary fields live at faces (normal components in 2-d). Velocity
// carries the homogeneous Dirichlet condition, so its degrees of freedom
// are the interior faces; the auxiliary fields keep the wall faces.
struct Grid {
  int d = 1;
  std::array<double, 2> extent{1.0, 1.0};
  std::array<int, 2> cells{1, 1};
  std::array<double, 2> h{0.0, 0.0};

  static Grid make(int d, std::span<const double> extents, std::span<const int> cells);

  int nx() const { return cells[0]; }
  int ny() const { return d == 2 ? cells[1] : 1; }

  int n_centers() const { return nx() * ny(); }
  int sigma_components() const { return d * (d + 1) / 2; }
  int n_sigma() const { return sigma_components() * n_centers(); }

  int n_xfaces_all() const { return (nx() + 1) * ny(); }
  int n_yfaces_all() const { return d == 2 ? nx() * (ny() + 1) : 0; }
  int n_xfaces_interior() const { return (nx() - 1) * ny(); }
  int n_yfaces_interior() const { return d == 2 ? nx() * (ny() - 1) : 0; }

  // psi layout: [all x-faces | all y-faces]; v layout: interior faces only.
  int n_psi() const { return n_xfaces_all() + n_yfaces_all(); }
  int n_v() const { return n_xfaces_interior() + n_yfaces_interior(); }

  int center(int i, int j = 0) const { return j * nx() + i; }
  int sigma_index(int comp, int i, int j = 0) const { return comp * n_centers() + center(i, j); }

  int xface_all(int i, int j = 0) const { return j * (nx() + 1) + i; }
  int yface_all(int i, int j) const { return n_xfaces_all() + j * nx() + i; }
  // Interior faces; callers must pass 1 <= i <= nx-1 (resp. j).
  int xface_interior(int i, int j = 0) const { return j * (nx() - 1) + (i - 1); }
  int yface_interior(int i, int j) const { return n_xfaces_interior() + (j - 1) * nx() + i; }


  double center_x(int i) const { return (i + 0.5) * h[0]; }
  double center_y(int j) const { return (j + 0.5) * h[1]; }
  double face_x(int i) const { return i * h[0]; }
  double face_y(int j) const { return j * h[1]; }
};

// For each interior-face (v) dof, its index in the all-faces (psi) layout.
std::vector<int> interior_to_all_face_map(const Grid& grid);

}  // namespace biot
