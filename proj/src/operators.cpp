#include "biot/operators.hpp"

#include <ostream>
#include <vector>

#include "biot/num_io.hpp"

namespace biot {

namespace {

using Triplet = Eigen::Triplet<double>;

SpMat from_triplets(int rows, int cols, std::vector<Triplet>& trip) {
  SpMat m(rows, cols);
  m.setFromTriplets(trip.begin(), trip.end());
  m.makeCompressed();
  return m;
}

// -Wrow^{-1} G^T Wcol for diagonal weights.
SpMat negative_weighted_adjoint(const SpMat& g, const Eigen::VectorXd& w_domain,
                                const Eigen::VectorXd& w_range) {
  SpMat gt = g.transpose();
  std::vector<Triplet> trip;
  trip.reserve(gt.nonZeros());
  for (int k = 0; k < gt.outerSize(); ++k)
    for (SpMat::InnerIterator it(gt, k); it; ++it)
      trip.emplace_back(it.row(), it.col(),
                        -it.value() * w_range[it.col()] / w_domain[it.row()]);
  return from_triplets(gt.rows(), gt.cols(), trip);
}

}  // namespace

DiscreteOps build_ops(const Grid& grid) {
  const int nx = grid.nx();
  const int ny = grid.ny();
  const double hx = grid.h[0];
  const double hy = grid.d == 2 ? grid.h[1] : 1.0;
  const double vol = grid.d == 2 ? hx * hy : hx;

  DiscreteOps ops;

  ops.wc = Eigen::VectorXd::Constant(grid.n_centers(), vol);
  ops.wv = Eigen::VectorXd::Constant(grid.n_v(), vol);
  ops.wf = Eigen::VectorXd::Constant(grid.n_psi(), vol);
  for (int j = 0; j < ny; ++j) {
    ops.wf[grid.xface_all(0, j)] = 0.5 * vol;
    ops.wf[grid.xface_all(nx, j)] = 0.5 * vol;
  }
  if (grid.d == 2)
    for (int i = 0; i < nx; ++i) {
      ops.wf[grid.yface_all(i, 0)] = 0.5 * vol;
      ops.wf[grid.yface_all(i, ny)] = 0.5 * vol;
    }
  ops.ws = Eigen::VectorXd::Constant(grid.n_sigma(), vol);
  if (grid.d == 2) ops.ws.segment(2 * grid.n_centers(), grid.n_centers()).setConstant(2.0 * vol);

  // Gp: pressure gradient to all faces; wall rows take the half-cell
  // stencil against the boundary value p=0.
  {
    std::vector<Triplet> trip, trip_v;
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i <= nx; ++i) {
        const int row = grid.xface_all(i, j);
        if (i == 0) {
          trip.emplace_back(row, grid.center(0, j), 2.0 / hx);
        } else if (i == nx) {
          trip.emplace_back(row, grid.center(nx - 1, j), -2.0 / hx);
        } else {
          trip.emplace_back(row, grid.center(i - 1, j), -1.0 / hx);
          trip.emplace_back(row, grid.center(i, j), 1.0 / hx);
          const int vrow = grid.xface_interior(i, j);
          trip_v.emplace_back(vrow, grid.center(i - 1, j), -1.0 / hx);
          trip_v.emplace_back(vrow, grid.center(i, j), 1.0 / hx);
        }
      }
    }
    if (grid.d == 2) {
      for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i < nx; ++i) {
          const int row = grid.yface_all(i, j);
          if (j == 0) {
            trip.emplace_back(row, grid.center(i, 0), 2.0 / hy);
          } else if (j == ny) {
            trip.emplace_back(row, grid.center(i, ny - 1), -2.0 / hy);
          } else {
            trip.emplace_back(row, grid.center(i, j - 1), -1.0 / hy);
            trip.emplace_back(row, grid.center(i, j), 1.0 / hy);
            const int vrow = grid.yface_interior(i, j);
            trip_v.emplace_back(vrow, grid.center(i, j - 1), -1.0 / hy);
            trip_v.emplace_back(vrow, grid.center(i, j), 1.0 / hy);
          }
        }
      }
    }
    ops.Gp = from_triplets(grid.n_psi(), grid.n_centers(), trip);
    ops.Gp_v = from_triplets(grid.n_v(), grid.n_centers(), trip_v);
  }

  // Gv: symmetric gradient of the velocity, one row per stored stress
  // component. Normal derivatives are compact; the shear row averages
  // wide tangential differences with odd-reflection ghosts at the walls.
  {
    std::vector<Triplet> trip;
    auto add_vx = [&](int row, int i, int j, double coef) {
      if (i < 1 || i > nx - 1) return;  // Dirichlet wall dof
      if (j < 0) {
        j = 0;
        coef = -coef;
      } else if (j > ny - 1) {
        j = ny - 1;
        coef = -coef;
      }
      trip.emplace_back(row, grid.xface_interior(i, j), coef);
    };
    auto add_vy = [&](int row, int i, int j, double coef) {
      if (j < 1 || j > ny - 1) return;
      if (i < 0) {
        i = 0;
        coef = -coef;
      } else if (i > nx - 1) {
        i = nx - 1;
        coef = -coef;
      }
      trip.emplace_back(row, grid.yface_interior(i, j), coef);
    };

    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const int row_xx = grid.sigma_index(0, i, j);
        add_vx(row_xx, i + 1, j, 1.0 / hx);
        add_vx(row_xx, i, j, -1.0 / hx);
      }
    if (grid.d == 2) {
      for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
          const int row_yy = grid.sigma_index(1, i, j);
          add_vy(row_yy, i, j + 1, 1.0 / hy);
          add_vy(row_yy, i, j, -1.0 / hy);

          const int row_xy = grid.sigma_index(2, i, j);
          for (int a : {i, i + 1}) {
            add_vx(row_xy, a, j + 1, 1.0 / (8.0 * hy));
            add_vx(row_xy, a, j - 1, -1.0 / (8.0 * hy));
          }
          for (int b : {j, j + 1}) {
            add_vy(row_xy, i + 1, b, 1.0 / (8.0 * hx));
            add_vy(row_xy, i - 1, b, -1.0 / (8.0 * hx));
          }
        }
    }
    ops.Gv = from_triplets(grid.n_sigma(), grid.n_v(), trip);
  }

  ops.Dv = negative_weighted_adjoint(ops.Gp, ops.wc, ops.wf);
  ops.Dv_v = negative_weighted_adjoint(ops.Gp_v, ops.wc, ops.wv);
  ops.Ds = negative_weighted_adjoint(ops.Gv, ops.wv, ops.ws);
  return ops;
}

void export_triplets(const SpMat& m, std::ostream& out) {
  out << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it)
      out << it.row() << ' ' << it.col() << ' ' << format_double(it.value()) << '\n';
}

}  // namespace biot
