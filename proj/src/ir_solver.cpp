#include "xbar/ir_solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "xbar/common.hpp"

namespace xbar {

// Node layout: a(i,j) = i*N + j on the row wires, b(i,j) = M*N + i*N + j on
// the column wires. Row i is driven at its entry through one segment into
// a(i,0); the far row end is open. Column j is open at the top and sensed at
// virtual ground through one segment below b(M-1,j), so a 1x1 array reduces to
// V / (R_dev + 2*r_wire).
std::vector<double> solve_ir_exact(std::span<const double> g, int rows, int cols,
                                   std::span<const double> v_in, double r_wire) {
  const int m = rows, n = cols;
  if (static_cast<int>(g.size()) != m * n || static_cast<int>(v_in.size()) != m)
    throw DimensionError("solve_ir_exact: shape mismatch");
  if (r_wire <= 0.0) {
    // Degenerate wiring: ideal MVM.
    std::vector<double> out(n, 0.0);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) out[j] += g[i * n + j] * v_in[i];
    return out;
  }

  const double gw = 1.0 / r_wire;
  const int total = 2 * m * n;
  auto a_idx = [&](int i, int j) { return i * n + j; };
  auto b_idx = [&](int i, int j) { return m * n + i * n + j; };

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(total) * 5);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(total);

  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      const double gij = g[i * n + j];
      // a(i,j): left segment (source for j==0), right segment, device link
      double diag_a = gij + gw; // left segment always present
      if (j == 0) {
        rhs[a_idx(i, j)] += gw * v_in[i];
      } else {
        trip.emplace_back(a_idx(i, j), a_idx(i, j - 1), -gw);
      }
      if (j + 1 < n) {
        diag_a += gw;
        trip.emplace_back(a_idx(i, j), a_idx(i, j + 1), -gw);
      }
      trip.emplace_back(a_idx(i, j), b_idx(i, j), -gij);
      trip.emplace_back(a_idx(i, j), a_idx(i, j), diag_a);

      // b(i,j): device link, segment below (to ground for i==M-1), segment above
      double diag_b = gij + gw; // below segment always present
      if (i + 1 < m) trip.emplace_back(b_idx(i, j), b_idx(i + 1, j), -gw);
      if (i > 0) {
        diag_b += gw;
        trip.emplace_back(b_idx(i, j), b_idx(i - 1, j), -gw);
      }
      trip.emplace_back(b_idx(i, j), a_idx(i, j), -gij);
      trip.emplace_back(b_idx(i, j), b_idx(i, j), diag_b);
    }
  }

  Eigen::SparseMatrix<double> A(total, total);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  solver.compute(A);
  if (solver.info() != Eigen::Success)
    throw NumericalError("IR-drop nodal solve failed to factorize (singular network)");
  Eigen::VectorXd v = solver.solve(rhs);
  if (solver.info() != Eigen::Success)
    throw NumericalError("IR-drop nodal solve failed in back-substitution");

  std::vector<double> out(n, 0.0);
  for (int j = 0; j < n; ++j) out[j] = gw * v[b_idx(m - 1, j)]; // sensed at the ground segment
  return out;
}

std::vector<double> solve_ir_approx(std::span<const double> g, int rows, int cols,
                                    std::span<const double> v_in, double r_wire) {
  const int m = rows, n = cols;
  if (static_cast<int>(g.size()) != m * n || static_cast<int>(v_in.size()) != m)
    throw DimensionError("solve_ir_approx: shape mismatch");

  // Zeroth-order currents: full input voltage across every device.
  std::vector<double> cur(static_cast<std::size_t>(m) * n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) cur[i * n + j] = g[i * n + j] * v_in[i];

  if (r_wire <= 0.0) {
    std::vector<double> out(n, 0.0);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) out[j] += cur[i * n + j];
    return out;
  }

  // Relax to the cumulative-resistance fixed point: each pass recomputes the
  // wire drops from the segment currents implied by the previous pass.
  // Contraction is geometric in the drop fraction, so a few passes land well
  // inside the wiring-budget error band.
  std::vector<double> a_drop(static_cast<std::size_t>(m) * n);
  std::vector<double> b_rise(static_cast<std::size_t>(m) * n);
  std::vector<double> prefix(m);
  for (int pass = 0; pass < 3; ++pass) {
    // row-wire drop at a(i,j): segments 0..j carry the current still to be
    // delivered downstream, r * sum_{k<=j} sum_{j'>=k} I(i,j')
    for (int i = 0; i < m; ++i) {
      double suffix = 0.0;
      for (int j = 0; j < n; ++j) suffix += cur[i * n + j];
      double acc = 0.0;
      for (int j = 0; j < n; ++j) {
        acc += suffix;
        a_drop[i * n + j] = r_wire * acc;
        suffix -= cur[i * n + j];
      }
    }
    // column-wire rise at b(i,j): segments from row i down to ground carry
    // the current collected above them, r * sum_{m'>=i} sum_{i'<=m'} I(i',j)
    for (int j = 0; j < n; ++j) {
      double total = 0.0;
      for (int i = 0; i < m; ++i) {
        total += cur[i * n + j];
        prefix[i] = total;
      }
      double acc = 0.0;
      for (int i = m - 1; i >= 0; --i) {
        acc += prefix[i];
        b_rise[i * n + j] = r_wire * acc;
      }
    }
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j)
        cur[i * n + j] = g[i * n + j] * (v_in[i] - a_drop[i * n + j] - b_rise[i * n + j]);
  }

  std::vector<double> out(n, 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) out[j] += cur[i * n + j];
  return out;
}

} // namespace xbar
