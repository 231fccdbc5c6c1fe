#pragma once

#include <stdexcept>
#include <vector>

#include "lds/grid.hpp"

namespace lds {

struct ConvergenceError : std::runtime_error {
  double residual;
  int iterations;
  ConvergenceError(const std::string& what, double res, int iters)
      : std::runtime_error(what), residual(res), iterations(iters) {}
};

// Principal Dirichlet eigenpair of -1/2 Laplacian - V on the grid box.
// The eigenvector is normalized to sum f^2 h^d = 1 and entrywise
// nonnegative (Perron ground state).
struct EigenResult {
  double lambda = 0.0;
  std::vector<double> eigenvector;
  double residual = 0.0;
  int iterations = 0;
};

double default_eigen_tol(int dim);

// Shift-and-invert power iteration, matrix-free; the inner solves are
// conjugate-gradient with the shift fixed below -||V||_inf so the shifted
// operator stays positive definite. Deterministic given inputs.
EigenResult principal_eigenvalue(const std::vector<double>& potential,
                                 const Grid& grid, double tol,
                                 const std::vector<double>* warm_start = nullptr);

// Rayleigh quotient 1/2 int ||grad f||^2 - int V f^2 for a test function
// normalized in the h^d-weighted norm.
double rayleigh(const std::vector<double>& potential,
                const std::vector<double>& f, const Grid& grid);

struct LocalizationGap {
  double lambda_big;
  double min_sub;
};

// Global principal eigenvalue on Q(B) against the minimum over the
// principal eigenvalues of the side-A sub-boxes partitioning Q(B), each
// with its own Dirichlet boundary. lambda_big <= min_sub always (test
// functions on a sub-box extend by zero).
LocalizationGap localization_gap(const std::vector<double>& potential_big,
                                 const Grid& grid_big, double A, double tol);

// Scenery rasterized at the cell centers, xi([r x]); requires h <= 1/(2r)
// so each cell samples a single scenery cell.
Profile rasterize_scenery(const Scenery& scenery, const Grid& grid, double r);

// Ground-state density: eigenvector squared, boundary layer zeroed,
// renormalized. Lets spectral output feed the rate-function solvers.
Density ground_state_density(const EigenResult& eig, const Grid& grid);

}  // namespace lds
