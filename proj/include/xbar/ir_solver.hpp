#pragma once

#include <span>
#include <vector>

namespace xbar {

/// Column currents of the full resistive ladder network: every row and column
/// wire has r_wire ohms per cell, inputs drive the row entries, columns are
/// sensed at virtual ground past the last row. Solved by sparse nodal
/// analysis (Kirchhoff current balance at 2*M*N nodes).
/// `g` is row-major M x N in siemens. Throws NumericalError on a singular
/// network.
std::vector<double> solve_ir_exact(std::span<const double> g, int rows, int cols,
                                   std::span<const double> v_in, double r_wire);

/// First-order IR-drop correction: node voltages are perturbed by the
/// cumulative wire resistance weighted by the zeroth-order currents each
/// segment carries. O(M*N); second-order accurate in N^2*r_wire*g.
std::vector<double> solve_ir_approx(std::span<const double> g, int rows, int cols,
                                    std::span<const double> v_in, double r_wire);

} // namespace xbar
