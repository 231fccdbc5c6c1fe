#include "lds/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lds {

namespace {

constexpr double kMassTol = 1e-12;

double bump(double r2) {
  // exp(-1/(1-(2r)^2)) for |r| < 1/2, with r2 = r^2.
  double s = 1.0 - 4.0 * r2;
  if (s <= 0.0) return 0.0;
  return std::exp(-1.0 / s);
}

}  // namespace

Grid::Grid(int dim_, double A_, int n_per_side_)
    : dim(dim_), A(A_), n_per_side(n_per_side_), h(A_ / n_per_side_) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("grid dim must be 1, 2 or 3");
  if (n_per_side < 2) throw std::invalid_argument("grid needs at least 2 cells per side");
  if (!(A > 0.0)) throw std::invalid_argument("box side must be positive");
}

std::size_t Grid::cells() const {
  std::size_t n = 1;
  for (int a = 0; a < dim; ++a) n *= static_cast<std::size_t>(n_per_side);
  return n;
}

double Grid::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= h;
  return v;
}

std::size_t Grid::flat(const std::array<int, 3>& c) const {
  std::size_t idx = 0;
  std::size_t stride = 1;
  for (int a = 0; a < dim; ++a) {
    idx += static_cast<std::size_t>(c[a]) * stride;
    stride *= static_cast<std::size_t>(n_per_side);
  }
  return idx;
}

std::array<int, 3> Grid::unflat(std::size_t idx) const {
  std::array<int, 3> c = {0, 0, 0};
  for (int a = 0; a < dim; ++a) {
    c[a] = static_cast<int>(idx % n_per_side);
    idx /= n_per_side;
  }
  return c;
}

bool Grid::same_as(const Grid& other) const {
  return dim == other.dim && n_per_side == other.n_per_side && A == other.A;
}

Profile::Profile(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.cells()) throw std::invalid_argument("profile size mismatch");
  for (double x : values)
    if (!(std::fabs(x) <= 1.0)) throw std::invalid_argument("profile values must lie in [-1,1]");
}

Profile Profile::constant(const Grid& g, double c) {
  return Profile(g, std::vector<double>(g.cells(), c));
}

Density Density::from_raw(const Grid& g, std::vector<double> v) {
  if (v.size() != g.cells()) throw std::invalid_argument("density size mismatch");
  double mass = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] >= 0.0)) throw std::invalid_argument("density values must be nonnegative");
    auto c = g.unflat(i);
    for (int a = 0; a < g.dim; ++a)
      if ((c[a] == 0 || c[a] == g.n_per_side - 1) && v[i] != 0.0)
        throw std::invalid_argument("density must vanish on the boundary layer");
    mass += v[i];
  }
  mass *= g.cell_volume();
  if (std::fabs(mass - 1.0) > kMassTol)
    throw std::invalid_argument("density mass must equal 1");
  Density d;
  d.grid = g;
  d.values = std::move(v);
  return d;
}

Density Density::normalized(const Grid& g, std::vector<double> v) {
  if (v.size() != g.cells()) throw std::invalid_argument("density size mismatch");
  double mass = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    auto c = g.unflat(i);
    bool boundary = false;
    for (int a = 0; a < g.dim; ++a)
      if (c[a] == 0 || c[a] == g.n_per_side - 1) boundary = true;
    if (boundary || v[i] < 0.0) v[i] = 0.0;
    mass += v[i];
  }
  mass *= g.cell_volume();
  if (!(mass > 0.0)) throw std::invalid_argument("density has no interior mass");
  for (double& x : v) x /= mass;
  return from_raw(g, std::move(v));
}

double mollifier_c0(int dim) {
  static double cache[4] = {0.0, 0.0, 0.0, 0.0};
  if (dim < 1 || dim > 3) throw std::invalid_argument("dim must be 1, 2 or 3");
  if (cache[dim] == 0.0) {
    // Radial Simpson quadrature; angular factors cancel in the ratio.
    const int n = 4096;
    const double dr = 0.5 / n;
    double num = 0.0, den = 0.0;
    for (int i = 0; i <= n; ++i) {
      double r = i * dr;
      double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      double e = bump(r * r);
      double rpow = std::pow(r, dim - 1);
      num += w * e * rpow * r * r;
      den += w * e * rpow;
    }
    cache[dim] = num / den;
  }
  return cache[dim];
}

Mollifier Mollifier::make(const Grid& g, double delta) {
  if (!(delta >= 2.0 * g.h))
    throw std::invalid_argument("mollifier width below grid resolution (need delta >= 2h)");
  Mollifier m;
  m.delta = delta;
  m.dim = g.dim;
  m.c0 = mollifier_c0(g.dim);
  m.radius = static_cast<int>(std::floor(0.5 * delta / g.h));

  double total = 0.0;
  std::array<int, 3> o = {0, 0, 0};
  int lo = -m.radius, hi = m.radius;
  for (o[2] = (g.dim > 2 ? lo : 0); o[2] <= (g.dim > 2 ? hi : 0); ++o[2])
    for (o[1] = (g.dim > 1 ? lo : 0); o[1] <= (g.dim > 1 ? hi : 0); ++o[1])
      for (o[0] = lo; o[0] <= hi; ++o[0]) {
        double r2 = 0.0;
        for (int a = 0; a < g.dim; ++a) r2 += (o[a] * g.h) * (o[a] * g.h);
        double w = bump(r2 / (delta * delta));
        if (w <= 0.0) continue;
        for (int a = 0; a < g.dim; ++a) m.offsets.push_back(o[a]);
        m.weights.push_back(w);
        total += w;
      }
  for (double& w : m.weights) w /= total;
  return m;
}

double pairing(const Density& mu, const Profile& u) {
  if (!mu.grid.same_as(u.grid)) throw std::invalid_argument("grid mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < mu.values.size(); ++i) s += mu.values[i] * u.values[i];
  return s * mu.grid.cell_volume();
}

ExtReal entropy_I(const Profile& u, const FieldLaw& law) {
  double s = 0.0;
  for (double v : u.values) {
    ExtReal hv = cramer(law, v);
    if (!hv.finite) return ExtReal::infinity();
    s += hv.value;
  }
  return s * u.grid.cell_volume();
}

double dirichlet_energy(const Grid& g, const std::vector<double>& f) {
  const int n = g.n_per_side;
  const double inv_h2 = 1.0 / (g.h * g.h);
  double energy = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    auto c = g.unflat(i);
    for (int a = 0; a < g.dim; ++a) {
      if (c[a] + 1 < n) {
        auto nb = c;
        nb[a] += 1;
        double d = f[g.flat(nb)] - f[i];
        energy += d * d * inv_h2;
      } else {
        energy += 2.0 * f[i] * f[i] * inv_h2;  // face at +A/2
      }
      if (c[a] == 0) {
        energy += 2.0 * f[i] * f[i] * inv_h2;  // face at -A/2
      }
    }
  }
  return energy * g.cell_volume();
}

double dirichlet_rate(const Density& mu) {
  std::vector<double> root(mu.values.size());
  for (std::size_t i = 0; i < root.size(); ++i) root[i] = std::sqrt(mu.values[i]);
  return 0.5 * dirichlet_energy(mu.grid, root);
}

std::vector<double> convolve(const Grid& g, const Mollifier& m,
                             const std::vector<double>& values) {
  if (m.dim != g.dim) throw std::invalid_argument("mollifier dimension mismatch");
  const int n = g.n_per_side;
  std::vector<double> out(values.size(), 0.0);
  const std::size_t k = m.weights.size();
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto c = g.unflat(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      std::array<int, 3> src = c;
      bool inside = true;
      for (int a = 0; a < g.dim; ++a) {
        src[a] -= m.offsets[j * g.dim + a];
        if (src[a] < 0 || src[a] >= n) {
          inside = false;
          break;
        }
      }
      if (inside) acc += m.weights[j] * values[g.flat(src)];
    }
    out[i] = acc;
  }
  return out;
}

Profile mollify(const Profile& u, const Mollifier& m) {
  auto out = convolve(u.grid, m, u.values);
  for (double& v : out) v = std::clamp(v, -1.0, 1.0);
  return Profile(u.grid, std::move(out));
}

Density mollify_density(const Density& mu, const Mollifier& m) {
  return Density::normalized(mu.grid, convolve(mu.grid, m, mu.values));
}

MollifierDefect mollifier_defect(const Density& mu, const Profile& u,
                                 const Mollifier& m, double eps1) {
  if (!(eps1 > 0.0)) throw std::invalid_argument("eps1 must be positive");
  Profile smoothed = mollify(u, m);
  double lhs = 0.0;
  for (std::size_t i = 0; i < mu.values.size(); ++i)
    lhs += mu.values[i] * (smoothed.values[i] - u.values[i]);
  lhs = std::fabs(lhs) * mu.grid.cell_volume();
  double rhs = (m.c0 * m.delta * m.delta / eps1) * dirichlet_rate(mu) + 2.0 * eps1;
  return {lhs, rhs};
}

Profile dyadic_quantize(const Profile& u, int n) {
  if (n < 0) throw std::invalid_argument("dyadic order must be nonnegative");
  double scale = std::ldexp(1.0, n);
  std::vector<double> out(u.values.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = std::trunc(u.values[i] * scale) / scale;
  return Profile(u.grid, std::move(out));
}

}  // namespace lds
