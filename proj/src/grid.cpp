#include "biot/grid.hpp"

#include <string>
#include <vector>

namespace biot {

Grid Grid::make(int d, std::span<const double> extents, std::span<const int> cells) {
  if (d < 1 || d > 2) throw GridError("grid: dimension must be 1 or 2");
  if (static_cast<int>(extents.size()) < d || static_cast<int>(cells.size()) < d)
    throw GridError("grid: need one extent and one cell count per axis");
  Grid g;
  g.d = d;
  for (int axis = 0; axis < d; ++axis) {
    if (!(extents[axis] > 0.0))
      throw GridError("grid: extent must be positive on axis " + std::to_string(axis));
    if (cells[axis] < 2)
      throw GridError("grid: need at least 2 cells per axis, got " +
                      std::to_string(cells[axis]));
    g.extent[axis] = extents[axis];
    g.cells[axis] = cells[axis];
    g.h[axis] = extents[axis] / cells[axis];
  }
  return g;
}

std::vector<int> interior_to_all_face_map(const Grid& grid) {
  std::vector<int> map(grid.n_v());
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 1; i <= grid.nx() - 1; ++i)
      map[grid.xface_interior(i, j)] = grid.xface_all(i, j);
  if (grid.d == 2)
    for (int j = 1; j <= grid.ny() - 1; ++j)
      for (int i = 0; i < grid.nx(); ++i)
        map[grid.yface_interior(i, j)] = grid.yface_all(i, j);
  return map;
}

}  // namespace biot
