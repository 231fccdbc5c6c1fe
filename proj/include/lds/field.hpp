#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lds/extreal.hpp"

namespace lds {

enum class LawKind { rademacher, uniform_symmetric, two_point, discrete };

// Mean-zero law on [-1,1] with positive variance. m/M are the essential
// infimum/supremum of the support.
struct FieldLaw {
  LawKind kind = LawKind::rademacher;
  std::vector<double> atoms;   // two_point / discrete only
  std::vector<double> probs;   // matching weights
  double m = -1.0;
  double M = 1.0;

  static FieldLaw rademacher();
  static FieldLaw uniform_symmetric();
  static FieldLaw two_point(double p, double a, double b);
  static FieldLaw discrete(std::vector<double> values, std::vector<double> probs);

  double variance() const;
  // Probability mass at x (0 for the continuous law).
  double atom_mass(double x) const;
  std::string kind_name() const;
};

// Log moment generating function Lambda(alpha) = log E[exp(alpha xi)].
// Finite for every alpha since the support is bounded; Lambda(0) = 0 and
// Lambda >= 0 because the law is centered.
double log_mgf(const FieldLaw& law, double alpha);
double log_mgf_prime(const FieldLaw& law, double alpha);
double log_mgf_second(const FieldLaw& law, double alpha);

// Legendre transform H(y) = sup_a (a y - Lambda(a)). +inf outside [m,M];
// at y in {m,M} returns the limit value -log P[xi = y] when that atom
// exists and +inf otherwise. Interior values come from a safeguarded
// Newton solve of Lambda'(a) = y with bisection fallback.
ExtReal cramer(const FieldLaw& law, double y);

// One i.i.d. draw as a pure function of (law, seed, site); shared by the
// stored sceneries below and by the lazy per-path fields in montecarlo.
double site_value(const FieldLaw& law, uint64_t seed, uint64_t site_key);

struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// i.i.d. lattice sample on the box [-halfwidth, halfwidth]^d. Values are a
// pure function of (law, dim, halfwidth, seed): regeneration is bit-exact
// and fills may run in any order.
struct Scenery {
  FieldLaw law;
  int dim = 1;
  int halfwidth = 1;
  uint64_t seed = 0;
  std::vector<double> values;

  int side() const { return 2 * halfwidth + 1; }
  std::size_t flat_index(const std::array<int, 3>& site) const;
  bool contains(const std::array<int, 3>& site) const;
  double at(const std::array<int, 3>& site) const;
};

Scenery sample_scenery(const FieldLaw& law, int dim, int halfwidth, uint64_t seed);

// Integer part with truncation toward zero; the fixed convention for all
// lattice indexing (so [-0.4] = 0 and [2.4] = 2).
inline int integer_part(double x) { return static_cast<int>(x); }

// xi_r(x) = xi([r x]) componentwise; throws std::out_of_range when the
// rescaled point leaves the sampled box.
double rescaled_eval(const Scenery& scenery, double r, std::span<const double> x);

}  // namespace lds
