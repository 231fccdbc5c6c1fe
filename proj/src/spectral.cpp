#include "lds/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lds {

namespace {

// out = (-1/2 Lap - V - shift) f with zero data on the box faces; the
// missing neighbor across a face is the antisymmetric ghost -f_c, which is
// exactly the gradient of the dirichlet_energy quadratic form.
void apply_operator(const Grid& g, const std::vector<double>& V, double shift,
                    const std::vector<double>& f, std::vector<double>& out) {
  const int n = g.n_per_side;
  const double half_inv_h2 = 0.5 / (g.h * g.h);
  const std::size_t total = f.size();
  const std::size_t stride1 = static_cast<std::size_t>(n);
  const std::size_t stride2 = stride1 * stride1;
  for (std::size_t i = 0; i < total; ++i) {
    auto c = g.unflat(i);
    double acc = 0.0;
    int faces = 0;
    for (int a = 0; a < g.dim; ++a) {
      std::size_t stride = a == 0 ? 1 : (a == 1 ? stride1 : stride2);
      if (c[a] > 0) acc += f[i - stride]; else ++faces;
      if (c[a] + 1 < n) acc += f[i + stride]; else ++faces;
    }
    out[i] = half_inv_h2 * ((2 * g.dim + faces) * f[i] - acc) - (V[i] + shift) * f[i];
  }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// CG for (Op - shift) x = b; the caller guarantees positive definiteness.
int conjugate_gradient(const Grid& g, const std::vector<double>& V, double shift,
                       const std::vector<double>& b, std::vector<double>& x,
                       double rel_tol, int max_iters) {
  std::vector<double> r = b;
  std::vector<double> ax(b.size());
  apply_operator(g, V, shift, x, ax);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= ax[i];
  std::vector<double> p = r;
  double rr = dot(r, r);
  const double stop = rel_tol * rel_tol * std::max(dot(b, b), 1e-300);
  int it = 0;
  for (; it < max_iters && rr > stop; ++it) {
    apply_operator(g, V, shift, p, ax);
    double pap = dot(p, ax);
    if (!(pap > 0.0)) break;
    double alpha = rr / pap;
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ax[i];
    }
    double rr_next = dot(r, r);
    double beta = rr_next / rr;
    rr = rr_next;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + beta * p[i];
  }
  return it;
}

// The d=1 operator is tridiagonal: the principal eigenvalue comes from
// Sturm-count bisection and the vector from inverse iteration with Thomas
// solves. Exact to tolerance regardless of spectral gaps, which matters
// for disordered potentials whose two lowest wells nearly tie.
EigenResult tridiagonal_ground_state(const std::vector<double>& V,
                                     const Grid& grid, double tol) {
  const int n = grid.n_per_side;
  const double inv2h2 = 0.5 / (grid.h * grid.h);
  std::vector<double> diag(n);
  for (int i = 0; i < n; ++i) {
    int faces = (i == 0 ? 1 : 0) + (i == n - 1 ? 1 : 0);
    diag[i] = inv2h2 * (2 + faces) - V[i];
  }
  const double off = -inv2h2;

  auto count_below = [&](double x) {
    int count = 0;
    double d = diag[0] - x;
    if (d < 0) ++count;
    for (int i = 1; i < n; ++i) {
      if (std::fabs(d) < 1e-300) d = d < 0 ? -1e-300 : 1e-300;
      d = diag[i] - x - off * off / d;
      if (d < 0) ++count;
    }
    return count;
  };

  double lo = diag[0], hi = diag[0];
  for (double d : diag) {
    lo = std::min(lo, d - 2.0 * std::fabs(off));
    hi = std::max(hi, d + 2.0 * std::fabs(off));
  }
  int bisections = 0;
  while (hi - lo > 1e-14 * (1.0 + std::fabs(lo)) && bisections < 300) {
    double mid = 0.5 * (lo + hi);
    if (count_below(mid) >= 1) hi = mid; else lo = mid;
    ++bisections;
  }
  double lambda = 0.5 * (lo + hi);

  const double vol = grid.cell_volume();
  std::vector<double> f(n, 1.0), work(n), upper(n);
  double residual = std::numeric_limits<double>::infinity();
  auto compute_residual = [&]() {
    double res2 = 0.0;
    for (int i = 0; i < n; ++i) {
      double acc = diag[i] * f[i];
      if (i > 0) acc += off * f[i - 1];
      if (i + 1 < n) acc += off * f[i + 1];
      double d = acc - lambda * f[i];
      res2 += d * d;
    }
    return std::sqrt(res2 * vol);
  };
  for (int sweep = 0; sweep < 60; ++sweep) {
    double shift = lambda - std::max(1e-11 * (1.0 + std::fabs(lambda)), 1e-12);
    work = f;
    double d0 = diag[0] - shift;
    upper[0] = off / d0;
    work[0] /= d0;
    for (int i = 1; i < n; ++i) {
      double di = diag[i] - shift - off * upper[i - 1];
      if (std::fabs(di) < 1e-300) di = 1e-300;
      upper[i] = off / di;
      work[i] = (work[i] - off * work[i - 1]) / di;
    }
    for (int i = n - 1; i-- > 0;) work[i] -= upper[i] * work[i + 1];
    double nrm = 0.0;
    for (double v : work) nrm += v * v;
    nrm = std::sqrt(nrm * vol);
    if (!(nrm > 0.0) || !std::isfinite(nrm)) break;
    for (int i = 0; i < n; ++i) f[i] = work[i] / nrm;
    residual = compute_residual();
    if (residual < tol * (1.0 + std::fabs(lambda)) && sweep >= 1) {
      double mass = 0.0;
      for (double x : f) mass += x;
      if (mass < 0.0)
        for (double& x : f) x = -x;
      for (double& x : f)
        if (x < 0.0 && x > -1e-10) x = 0.0;
      EigenResult out;
      out.lambda = lambda;
      out.eigenvector = std::move(f);
      out.residual = residual;
      out.iterations = bisections + sweep + 1;
      return out;
    }
  }
  throw ConvergenceError("tridiagonal inverse iteration did not converge",
                         residual, bisections);
}

}  // namespace

double default_eigen_tol(int dim) { return dim == 1 ? 1e-8 : 1e-6; }

EigenResult principal_eigenvalue(const std::vector<double>& potential,
                                 const Grid& grid, double tol,
                                 const std::vector<double>* warm_start) {
  if (potential.size() != grid.cells())
    throw std::invalid_argument("potential size mismatch");
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (grid.cells() > (std::size_t(1) << 22))
    throw std::invalid_argument("operator exceeds the 2^22-unknown budget");
  if (grid.dim == 1) return tridiagonal_ground_state(potential, grid, tol);

  const double vol = grid.cell_volume();
  double vmax = 0.0;
  for (double v : potential) vmax = std::max(vmax, std::fabs(v));
  const double shift = -vmax - 1.0;

  std::vector<double> f;
  if (warm_start && warm_start->size() == grid.cells()) {
    f = *warm_start;
  } else {
    f.assign(grid.cells(), 1.0);
  }
  auto normalize = [&](std::vector<double>& v) {
    double nrm = std::sqrt(dot(v, v) * vol);
    for (double& x : v) x /= nrm;
  };
  normalize(f);

  std::vector<double> next(f.size());
  std::vector<double> opf(f.size());
  const int max_outer = 5000;
  const int max_inner = static_cast<int>(30 * grid.cells()) + 3000;
  double lambda = 0.0;
  double residual = 0.0;
  int total_inner = 0;
  for (int it = 1; it <= max_outer; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    total_inner += conjugate_gradient(grid, potential, shift, f, next, 1e-12, max_inner);
    normalize(next);
    f.swap(next);

    apply_operator(grid, potential, 0.0, f, opf);
    double lambda_new = dot(f, opf) * vol;
    double res2 = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      double d = opf[i] - lambda_new * f[i];
      res2 += d * d;
    }
    residual = std::sqrt(res2 * vol);
    bool settled = std::fabs(lambda_new - lambda) < tol * (1.0 + std::fabs(lambda_new));
    lambda = lambda_new;
    if (it > 1 && settled && residual < tol * (1.0 + std::fabs(lambda))) {
      // Perron ground state: fix the global sign, sweep out float dust.
      double mass = 0.0;
      for (double x : f) mass += x;
      if (mass < 0.0)
        for (double& x : f) x = -x;
      for (double& x : f)
        if (x < 0.0 && x > -1e-10) x = 0.0;
      EigenResult out;
      out.lambda = lambda;
      out.eigenvector = std::move(f);
      out.residual = residual;
      out.iterations = it;
      return out;
    }
  }
  throw ConvergenceError("eigenvalue iteration did not converge", residual, max_outer);
}

double rayleigh(const std::vector<double>& potential,
                const std::vector<double>& f, const Grid& grid) {
  if (potential.size() != grid.cells() || f.size() != grid.cells())
    throw std::invalid_argument("size mismatch");
  const double vol = grid.cell_volume();
  double norm2 = dot(f, f) * vol;
  if (std::fabs(norm2 - 1.0) > 1e-8)
    throw std::invalid_argument("test function must be normalized (sum f^2 h^d = 1)");
  double vterm = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) vterm += potential[i] * f[i] * f[i];
  return 0.5 * dirichlet_energy(grid, f) - vterm * vol;
}

LocalizationGap localization_gap(const std::vector<double>& potential_big,
                                 const Grid& grid_big, double A, double tol) {
  const double ratio = grid_big.A / A;
  const int k = static_cast<int>(std::lround(ratio));
  if (k < 1 || std::fabs(ratio - k) > 1e-9)
    throw std::invalid_argument("sub-box side must divide the big box side");
  if (grid_big.n_per_side % k != 0)
    throw std::invalid_argument("grid does not align with the sub-box partition");
  const int n_sub = grid_big.n_per_side / k;
  if (n_sub < 2) throw std::invalid_argument("sub-box resolution too coarse");

  LocalizationGap out;
  out.lambda_big = principal_eigenvalue(potential_big, grid_big, tol).lambda;

  Grid sub(grid_big.dim, A, n_sub);
  out.min_sub = std::numeric_limits<double>::infinity();
  std::array<int, 3> box = {0, 0, 0};
  int boxes[3] = {k, grid_big.dim > 1 ? k : 1, grid_big.dim > 2 ? k : 1};
  std::vector<double> vsub(sub.cells());
  for (box[2] = 0; box[2] < boxes[2]; ++box[2])
    for (box[1] = 0; box[1] < boxes[1]; ++box[1])
      for (box[0] = 0; box[0] < boxes[0]; ++box[0]) {
        for (std::size_t j = 0; j < vsub.size(); ++j) {
          auto c = sub.unflat(j);
          std::array<int, 3> cbig = {0, 0, 0};
          for (int a = 0; a < grid_big.dim; ++a) cbig[a] = box[a] * n_sub + c[a];
          vsub[j] = potential_big[grid_big.flat(cbig)];
        }
        double lam = principal_eigenvalue(vsub, sub, tol).lambda;
        out.min_sub = std::min(out.min_sub, lam);
      }
  return out;
}

Profile rasterize_scenery(const Scenery& scenery, const Grid& grid, double r) {
  if (scenery.dim != grid.dim) throw std::invalid_argument("dimension mismatch");
  if (!(grid.h <= 0.5 / r + 1e-12))
    throw std::invalid_argument("grid too coarse for the rescaled field (need h <= 1/(2r))");
  std::vector<double> v(grid.cells());
  std::vector<double> x(grid.dim);
  for (std::size_t i = 0; i < v.size(); ++i) {
    auto c = grid.unflat(i);
    for (int a = 0; a < grid.dim; ++a) x[a] = grid.center(c[a]);
    v[i] = rescaled_eval(scenery, r, x);
  }
  return Profile(grid, std::move(v));
}

Density ground_state_density(const EigenResult& eig, const Grid& grid) {
  std::vector<double> rho(eig.eigenvector.size());
  for (std::size_t i = 0; i < rho.size(); ++i)
    rho[i] = eig.eigenvector[i] * eig.eigenvector[i];
  return Density::normalized(grid, std::move(rho));
}

}  // namespace lds
