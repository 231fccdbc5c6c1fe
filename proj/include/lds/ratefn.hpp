#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "lds/extreal.hpp"
#include "lds/grid.hpp"
#include "lds/spectral.hpp"

namespace lds {

// Truncation box, resolution and solver tolerances shared by the
// variational rate solvers. With extrapolate set, values are Richardson
// extrapolated over {A, 2A} at matched N (the box error is O(A^-2)),
// which also makes the zero-coupling values vanish exactly.
struct RateSettings {
  int dim = 1;
  double A = 4.0;
  int N = 128;
  double feas_tol = 1e-4;      // on |<mu,u> - y|
  double obj_tol = 1e-6;       // relative objective change between alternations
  double eps_strict = 1e-6;    // margin turning I(u) < d into a closed constraint
  double eig_tol = 0.0;        // 0 -> default_eigen_tol(dim)
  int max_alternations = 60;
  int n_random_starts = 3;
  uint64_t seed = 1;
  bool extrapolate = true;
  double multiplier_cap = 1e5;

  double eigen_tol() const { return eig_tol > 0.0 ? eig_tol : default_eigen_tol(dim); }
  Grid base_grid() const { return Grid(dim, A, N); }
};

struct InfeasibleError : std::runtime_error {
  double target_y;
  double achieved_y;
  InfeasibleError(double target, double achieved)
      : std::runtime_error("variational solver could not reach the pairing target"),
        target_y(target), achieved_y(achieved) {}
};

struct GridExtensionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Best feasible pair found by an alternating solve. The scalar fields
// refer to the raw ground-state pair on the base box; best_u/best_mu are
// the exportable typed objects (the density export zeroes the compact
// support layer, an O(h) perturbation of the kinetic term).
struct VariationalResult {
  ExtReal value = ExtReal(0.0);
  double achieved_y = 0.0;
  double feasibility_gap = 0.0;
  double entropy = 0.0;
  double kinetic = 0.0;
  bool feasible = false;
  int eigen_solves = 0;
  int alternations = 0;
  Profile best_u;
  Density best_mu;
};

// inf { I(u) + L(mu) : <mu,u> = y } over u in B_1(A), mu in M_1^0(Q(A)),
// by alternating exact coordinate minimizations: the mu-step solves the
// multiplier equation <mu_a, u> = y through eigen solves of alpha*u, the
// u-step is the pointwise update u = Lambda'(c mu) with c matched to the
// pairing target. Multi-start keeps the best feasible objective.
VariationalResult annealed_rate(double y, const FieldLaw& law, const RateSettings& s);

struct ProductFormResult {
  ExtReal value;        // c_d * I^{2/(d+2)} L^{d/(d+2)} at the best pair
  double c_d;           // (2/d)^{d/(d+2)} (1 + d/2)
  double dilation_min;  // min_A A^d I + A^{-2} L, single-variable closed form
  double best_A;        // argmin of the dilation
  double entropy;       // I at the pair used
  double kinetic;       // L at the pair used
};

ProductFormResult annealed_rate_product_form(double y, const FieldLaw& law,
                                             const RateSettings& s);

// F(y; f) = sup_{a>0} { a y - int Lambda(a f) }, concave in a; golden
// section after bracketing on a log grid. +inf when the ascent is
// unbounded (y above the reachable mean), 0 when the supremum sits at
// a -> 0+.
ExtReal dual_upper(double y, const Density& f, const FieldLaw& law);

struct DualityCheck {
  ExtReal primal;
  ExtReal dual;
  double gap;  // primal - dual when both finite, else 0
};

// primal = inf { I_A(u) : <f,u> >= y } via the pointwise characterization
// u = Lambda'(a f) with the multiplier matched by bisection and the
// entropy summed through the independent Cramer solver; dual = dual_upper.
DualityCheck duality_check(double y, const Density& f, const FieldLaw& law);

// l(alpha) = inf { lambda(alpha u, Q(A)) : I_A(u) <= dim }, alternating
// eigen solves with the budgeted pointwise update u = Lambda'(alpha phi^2
// / kappa). Reported relative to the free box energy lambda(0, Q(A)),
// which makes l(0) = 0 exact and the bounds -alpha M <= l <= 0 hold at
// any finite box; with extrapolate set, Richardson over {A, 2A} on the
// centered values, clamped into the proven bounds.
double quenched_l(double alpha, const FieldLaw& law, const RateSettings& s);

struct QuenchedDetail {
  double value = 0.0;       // extrapolated (or raw) l(alpha)
  double base_value = 0.0;  // raw value on the base box
  double entropy = 0.0;     // I(u) at the base-box minimizer
  Profile best_u;           // base-box minimizer
};

QuenchedDetail quenched_l_detail(double alpha, const FieldLaw& law,
                                 const RateSettings& s);

// Sorted sample table of l; grown lazily by quenched_J.
struct LegendrePair {
  std::vector<double> alphas;
  std::vector<double> l_values;

  void insert(double alpha, double l);
  bool contains(double alpha) const;
};

LegendrePair default_l_table(const FieldLaw& law, const RateSettings& s,
                             double alpha_max = 8.0, int per_side = 8);

// J(y) = sup_alpha (alpha y + l(alpha)) over the table; the table is
// extended (doubling the range) while the maximizer sits on the boundary.
// +inf outside [m, M]. Exactly convex in y and exactly 0 at 0 by the
// max-affine construction.
ExtReal quenched_J(double y, const FieldLaw& law, const RateSettings& s,
                   LegendrePair& table);

// J1(y) = inf { L(mu) : <mu,u> = y, I(u) <= dim - eps_strict }, same
// alternation with objective and constraint roles adapted. Centered on
// the free box energy like quenched_l (u == 0 makes the free state
// feasible at y = 0, so the centered value vanishes there) and clamped
// to >= 0; Richardson over {A, 2A} when extrapolate is set.
VariationalResult j1_rate(double y, const FieldLaw& law, const RateSettings& s);

// One mixture round of the scenario bound: out[k] = min over grid chords
// through k. Iterating to a fixed point yields the lower convex envelope
// on the grid (never increases any value).
std::vector<ExtReal> jp_combine(const std::vector<double>& ys,
                                const std::vector<ExtReal>& values);

// Fixed point of jp_combine.
std::vector<ExtReal> convexify_by_mixtures(const std::vector<double>& ys,
                                           const std::vector<ExtReal>& values);

// Unique positive root of t = r^2 exp(r^d); bisection-safeguarded Newton,
// relative round-trip error at most 1e-10.
double r_of_t(double t, int dim);

struct CurvePoint {
  double x = 0.0;        // y (rate curves) or alpha (l tables)
  ExtReal value;
  double feasibility = 0.0;
};

struct RateCurve {
  std::string kind;
  FieldLaw law;
  RateSettings settings;
  std::vector<CurvePoint> points;
};

// kinds: annealed | annealed_product | quenched_J | j1 | quenched_l
RateCurve build_rate_curve(const std::string& kind, const std::vector<double>& xs,
                           const FieldLaw& law, const RateSettings& s,
                           int threads = 1);

}  // namespace lds
