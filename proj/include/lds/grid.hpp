#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "lds/extreal.hpp"
#include "lds/field.hpp"

namespace lds {

// Regular grid of N^d cells on the box Q(A) = [-A/2, A/2]^d, cell centers
// at -A/2 + (k+1/2)h with h = A/N. Functions vanish on the box faces
// (Dirichlet); the face sits half a cell outside the outermost center.
struct Grid {
  int dim = 1;
  double A = 1.0;
  int n_per_side = 2;
  double h = 0.5;

  Grid() = default;
  Grid(int dim_, double A_, int n_per_side_);

  std::size_t cells() const;
  double cell_volume() const;
  double center(int k) const { return -0.5 * A + (k + 0.5) * h; }
  std::size_t flat(const std::array<int, 3>& c) const;
  std::array<int, 3> unflat(std::size_t idx) const;
  bool same_as(const Grid& other) const;
};

// u in B_1(A): one value per cell, sup-norm at most 1.
struct Profile {
  Grid grid;
  std::vector<double> values;

  Profile() = default;
  Profile(const Grid& g, std::vector<double> v);
  static Profile constant(const Grid& g, double c);
};

// mu in M_1^0(Q(A)): nonnegative density values, unit total mass, and an
// outermost layer of exact zeros (compact support strictly inside).
struct Density {
  Grid grid;
  std::vector<double> values;

  Density() = default;
  // Validates all invariants.
  static Density from_raw(const Grid& g, std::vector<double> v);
  // Zeroes the boundary layer, clamps negatives, normalizes the mass.
  static Density normalized(const Grid& g, std::vector<double> v);
};

// Smooth bump kernel scaled to width delta: support inside a ball of
// radius delta/2, discrete weights renormalized to sum exactly 1.
// c0 is the continuum second-moment constant of the unit-width kernel.
struct Mollifier {
  double delta = 0.0;
  double c0 = 0.0;
  int radius = 0;                 // stencil radius in cells
  std::vector<int> offsets;       // packed dim-tuples, stride dim
  std::vector<double> weights;    // sums to 1
  int dim = 1;

  static Mollifier make(const Grid& g, double delta);
};

// Second-moment constant of the unit bump, cached per dimension.
double mollifier_c0(int dim);

// <mu, u> = sum mu_c u_c h^d.
double pairing(const Density& mu, const Profile& u);

// I_A(u) = sum H(u_c) h^d; +inf when any cell leaves [m,M]. Exact for
// piecewise-constant profiles, no quadrature involved.
ExtReal entropy_I(const Profile& u, const FieldLaw& law);

// Dirichlet energy sum ||grad f||^2 over the box with zero boundary data
// on the faces; shared between the occupation rate below and the spectral
// module's quadratic form.
double dirichlet_energy(const Grid& g, const std::vector<double>& f);

// L(mu) = 1/2 int ||grad sqrt(mu)||^2, the occupation-measure rate.
double dirichlet_rate(const Density& mu);

// Discrete convolution with zero padding outside the box.
std::vector<double> convolve(const Grid& g, const Mollifier& m,
                             const std::vector<double>& values);

Profile mollify(const Profile& u, const Mollifier& m);
// Density smoothing; renormalizes the (possibly truncated) boundary mass.
Density mollify_density(const Density& mu, const Mollifier& m);

struct MollifierDefect {
  double lhs;  // |<mu, psi_delta * u - u>|
  double rhs;  // (c0 delta^2 / eps1) L(mu) + 2 eps1
};

MollifierDefect mollifier_defect(const Density& mu, const Profile& u,
                                 const Mollifier& m, double eps1);

// Per-cell value -> floor(2^n v)/2^n with truncation toward zero, the
// countable dyadic class; never increases the entropy.
Profile dyadic_quantize(const Profile& u, int n);

}  // namespace lds
