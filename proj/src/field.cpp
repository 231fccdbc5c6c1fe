#include "lds/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lds/rng.hpp"

namespace lds {

namespace {

constexpr double kMeanTol = 1e-12;

void check_support(double x) {
  if (!(x >= -1.0 && x <= 1.0))
    throw std::invalid_argument("field law support must lie in [-1,1]");
}

// log cosh with the overflow-safe branch for large |a|.
double log_cosh(double a) {
  double x = std::fabs(a);
  if (x > 30.0) return x - std::log(2.0) + std::log1p(std::exp(-2.0 * x));
  return std::log(std::cosh(x));
}

// log(sinh a / a), even in a; series below 1e-2, asymptotic above 30.
double log_sinhc(double a) {
  double x = std::fabs(a);
  if (x < 1e-2) {
    double x2 = x * x;
    // log(1 + x^2/6 + x^4/120 + ...) expanded
    return x2 / 6.0 - x2 * x2 / 180.0 + x2 * x2 * x2 / 2835.0;
  }
  if (x > 30.0) return x - std::log(2.0 * x) + std::log1p(-std::exp(-2.0 * x));
  return std::log(std::sinh(x) / x);
}

// d/da log(sinh a / a) = coth(a) - 1/a.
double sinhc_prime(double a) {
  if (std::fabs(a) < 1e-2) {
    double a2 = a * a;
    return a / 3.0 - a * a2 / 45.0 + 2.0 * a * a2 * a2 / 945.0;
  }
  return 1.0 / std::tanh(a) - 1.0 / a;
}

// 1/a^2 - 1/sinh^2(a), the variance of the tilted uniform law.
double sinhc_second(double a) {
  double x = std::fabs(a);
  if (x < 1e-2) {
    double x2 = x * x;
    return 1.0 / 3.0 - x2 / 15.0 + 2.0 * x2 * x2 / 189.0;
  }
  if (x > 30.0) return 1.0 / (x * x);
  double s = std::sinh(x);
  return 1.0 / (x * x) - 1.0 / (s * s);
}

struct TiltedMoments {
  double lambda;  // log E e^{a xi}
  double mean;    // E_tilted xi
  double var;     // Var_tilted xi
};

TiltedMoments atomic_moments(const FieldLaw& law, double a) {
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < law.atoms.size(); ++i)
    shift = std::max(shift, a * law.atoms[i]);
  double z = 0.0, zx = 0.0, zxx = 0.0;
  for (std::size_t i = 0; i < law.atoms.size(); ++i) {
    double w = law.probs[i] * std::exp(a * law.atoms[i] - shift);
    z += w;
    zx += w * law.atoms[i];
    zxx += w * law.atoms[i] * law.atoms[i];
  }
  TiltedMoments out;
  out.lambda = shift + std::log(z);
  out.mean = zx / z;
  out.var = std::max(0.0, zxx / z - out.mean * out.mean);
  return out;
}

}  // namespace

FieldLaw FieldLaw::rademacher() {
  FieldLaw law;
  law.kind = LawKind::rademacher;
  law.m = -1.0;
  law.M = 1.0;
  return law;
}

FieldLaw FieldLaw::uniform_symmetric() {
  FieldLaw law;
  law.kind = LawKind::uniform_symmetric;
  law.m = -1.0;
  law.M = 1.0;
  return law;
}

FieldLaw FieldLaw::two_point(double p, double a, double b) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("two_point weight must lie in (0,1)");
  return discrete({a, b}, {p, 1.0 - p});
}

FieldLaw FieldLaw::discrete(std::vector<double> values, std::vector<double> probs) {
  if (values.empty() || values.size() != probs.size())
    throw std::invalid_argument("discrete law needs matching atoms and weights");
  double mass = 0.0, mean = 0.0, second = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    check_support(values[i]);
    if (!(probs[i] > 0.0))
      throw std::invalid_argument("discrete law weights must be positive");
    mass += probs[i];
    mean += probs[i] * values[i];
    second += probs[i] * values[i] * values[i];
  }
  if (std::fabs(mass - 1.0) > kMeanTol)
    throw std::invalid_argument("discrete law weights must sum to 1");
  if (std::fabs(mean) > kMeanTol)
    throw std::invalid_argument("field law must be centered");
  if (!(second - mean * mean > 0.0))
    throw std::invalid_argument("field law must have positive variance");
  FieldLaw law;
  law.kind = values.size() == 2 ? LawKind::two_point : LawKind::discrete;
  law.atoms = std::move(values);
  law.probs = std::move(probs);
  law.m = *std::min_element(law.atoms.begin(), law.atoms.end());
  law.M = *std::max_element(law.atoms.begin(), law.atoms.end());
  return law;
}

double FieldLaw::variance() const {
  switch (kind) {
    case LawKind::rademacher: return 1.0;
    case LawKind::uniform_symmetric: return 1.0 / 3.0;
    default: {
      double mean = 0.0, second = 0.0;
      for (std::size_t i = 0; i < atoms.size(); ++i) {
        mean += probs[i] * atoms[i];
        second += probs[i] * atoms[i] * atoms[i];
      }
      return second - mean * mean;
    }
  }
}

double FieldLaw::atom_mass(double x) const {
  switch (kind) {
    case LawKind::rademacher:
      return (x == 1.0 || x == -1.0) ? 0.5 : 0.0;
    case LawKind::uniform_symmetric:
      return 0.0;
    default: {
      double mass = 0.0;
      for (std::size_t i = 0; i < atoms.size(); ++i)
        if (atoms[i] == x) mass += probs[i];
      return mass;
    }
  }
}

std::string FieldLaw::kind_name() const {
  switch (kind) {
    case LawKind::rademacher: return "rademacher";
    case LawKind::uniform_symmetric: return "uniform_symmetric";
    case LawKind::two_point: return "two_point";
    default: return "discrete";
  }
}

double log_mgf(const FieldLaw& law, double alpha) {
  switch (law.kind) {
    case LawKind::rademacher: return log_cosh(alpha);
    case LawKind::uniform_symmetric: return log_sinhc(alpha);
    default: return atomic_moments(law, alpha).lambda;
  }
}

double log_mgf_prime(const FieldLaw& law, double alpha) {
  switch (law.kind) {
    case LawKind::rademacher: return std::tanh(alpha);
    case LawKind::uniform_symmetric: return sinhc_prime(alpha);
    default: return atomic_moments(law, alpha).mean;
  }
}

double log_mgf_second(const FieldLaw& law, double alpha) {
  switch (law.kind) {
    case LawKind::rademacher: {
      double c = std::cosh(std::min(std::fabs(alpha), 350.0));
      return 1.0 / (c * c);
    }
    case LawKind::uniform_symmetric: return sinhc_second(alpha);
    default: return atomic_moments(law, alpha).var;
  }
}

ExtReal cramer(const FieldLaw& law, double y) {
  if (y < law.m || y > law.M) return ExtReal::infinity();
  if (y == 0.0) return 0.0;
  if (y == law.m || y == law.M) {
    double mass = law.atom_mass(y);
    if (mass > 0.0) return -std::log(mass);
    return ExtReal::infinity();
  }

  // Bracket Lambda'(a) = y, growing geometrically from [-1,1].
  double lo = -1.0, hi = 1.0;
  int grow = 0;
  while (log_mgf_prime(law, hi) < y) {
    hi *= 2.0;
    if (++grow > 100) break;
  }
  grow = 0;
  while (log_mgf_prime(law, lo) > y) {
    lo *= 2.0;
    if (++grow > 100) break;
  }

  const double tol = 1e-12;
  double a = 0.5 * (lo + hi);
  double g = log_mgf_prime(law, a) - y;
  int stale = 0;
  double prev_width = hi - lo;
  for (int it = 0; it < 200 && std::fabs(g) > tol; ++it) {
    double curvature = log_mgf_second(law, a);
    double step = curvature > 0.0 ? g / curvature : 0.0;
    double candidate = a - step;
    if (!(candidate > lo && candidate < hi) || step == 0.0) {
      candidate = 0.5 * (lo + hi);  // bisection fallback
    }
    a = candidate;
    g = log_mgf_prime(law, a) - y;
    if (g > 0.0) hi = a; else lo = a;
    if (hi - lo > 0.5 * prev_width) {
      if (++stale >= 3) {  // force bisection when Newton stops contracting
        a = 0.5 * (lo + hi);
        g = log_mgf_prime(law, a) - y;
        if (g > 0.0) hi = a; else lo = a;
        stale = 0;
      }
    } else {
      stale = 0;
    }
    prev_width = hi - lo;
    if (hi - lo < 1e-16 * (1.0 + std::fabs(a))) break;
  }
  return a * y - log_mgf(law, a);
}

double site_value(const FieldLaw& law, uint64_t seed, uint64_t site_key) {
  uint64_t bits = mix64(seed, site_key);
  switch (law.kind) {
    case LawKind::rademacher:
      return (bits >> 63) ? 1.0 : -1.0;
    case LawKind::uniform_symmetric:
      return 2.0 * u01(bits) - 1.0;
    default: {
      double u = u01(bits);
      double acc = 0.0;
      for (std::size_t i = 0; i + 1 < law.atoms.size(); ++i) {
        acc += law.probs[i];
        if (u <= acc) return law.atoms[i];
      }
      return law.atoms.back();
    }
  }
}

std::size_t Scenery::flat_index(const std::array<int, 3>& site) const {
  std::size_t idx = 0;
  std::size_t stride = 1;
  for (int a = 0; a < dim; ++a) {
    idx += static_cast<std::size_t>(site[a] + halfwidth) * stride;
    stride *= static_cast<std::size_t>(side());
  }
  return idx;
}

bool Scenery::contains(const std::array<int, 3>& site) const {
  for (int a = 0; a < dim; ++a)
    if (site[a] < -halfwidth || site[a] > halfwidth) return false;
  return true;
}

double Scenery::at(const std::array<int, 3>& site) const {
  if (!contains(site)) throw std::out_of_range("lattice site outside scenery box");
  return values[flat_index(site)];
}

Scenery sample_scenery(const FieldLaw& law, int dim, int halfwidth, uint64_t seed) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("dim must be 1, 2 or 3");
  if (halfwidth < 1) throw std::invalid_argument("halfwidth must be >= 1");
  std::size_t side = static_cast<std::size_t>(2 * halfwidth + 1);
  std::size_t total = 1;
  for (int a = 0; a < dim; ++a) {
    if (total > (std::size_t(1) << 26) / side)
      throw CapacityError("scenery box exceeds the memory budget");
    total *= side;
  }

  Scenery sc;
  sc.law = law;
  sc.dim = dim;
  sc.halfwidth = halfwidth;
  sc.seed = seed;
  sc.values.resize(total);

  std::array<int, 3> site = {0, 0, 0};
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (int a = 0; a < dim; ++a) {
      site[a] = static_cast<int>(rem % side) - halfwidth;
      rem /= side;
    }
    sc.values[flat] = site_value(law, seed, pack_site(site, dim));
  }
  return sc;
}

double rescaled_eval(const Scenery& scenery, double r, std::span<const double> x) {
  if (static_cast<int>(x.size()) != scenery.dim)
    throw std::invalid_argument("point dimension mismatch");
  std::array<int, 3> site = {0, 0, 0};
  for (int a = 0; a < scenery.dim; ++a) site[a] = integer_part(r * x[a]);
  return scenery.at(site);
}

}  // namespace lds
