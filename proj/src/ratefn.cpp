#include "lds/ratefn.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "lds/parallel.hpp"
#include "lds/rng.hpp"

namespace lds {

namespace {

using ScalarFn = std::function<double(double)>;

struct Bracket {
  double lo = 0.0, hi = 0.0, flo = 0.0, fhi = 0.0;
  bool ok = false;
};

// Expand around x0 until fn changes sign; fn must be increasing.
Bracket expand_bracket(const ScalarFn& fn, double x0, double step, double cap,
                       double ftol) {
  Bracket b;
  double f0 = fn(x0);
  if (std::fabs(f0) <= ftol) {
    b.lo = b.hi = x0;
    b.flo = b.fhi = f0;
    b.ok = true;
    return b;
  }
  double dir = f0 < 0.0 ? 1.0 : -1.0;
  double x = x0, fx = f0;
  double width = step;
  while (std::fabs(x) <= cap) {
    double x_next = x + dir * width;
    double f_next = fn(x_next);
    if ((f0 < 0.0 && f_next >= 0.0) || (f0 > 0.0 && f_next <= 0.0)) {
      b.lo = std::min(x, x_next);
      b.hi = std::max(x, x_next);
      b.flo = dir > 0 ? fx : f_next;
      b.fhi = dir > 0 ? f_next : fx;
      b.ok = true;
      return b;
    }
    x = x_next;
    fx = f_next;
    width *= 2.0;
  }
  return b;
}

// Illinois variant of regula falsi on an increasing function.
double illinois_root(const ScalarFn& fn, Bracket b, double ftol, int max_iter) {
  if (b.lo == b.hi) return b.lo;
  double lo = b.lo, hi = b.hi, flo = b.flo, fhi = b.fhi;
  if (std::fabs(flo) <= ftol) return lo;
  if (std::fabs(fhi) <= ftol) return hi;
  double x = lo;
  int side = 0;
  for (int it = 0; it < max_iter; ++it) {
    x = (flo == fhi) ? 0.5 * (lo + hi) : hi - fhi * (hi - lo) / (fhi - flo);
    if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
    double fx = fn(x);
    if (std::fabs(fx) <= ftol || hi - lo < 1e-15 * (1.0 + std::fabs(x))) return x;
    if (fx < 0.0) {
      lo = x;
      flo = fx;
      if (side == -1) fhi *= 0.5;
      side = -1;
    } else {
      hi = x;
      fhi = fx;
      if (side == 1) flo *= 0.5;
      side = 1;
    }
  }
  return x;
}

double golden_max(const ScalarFn& fn, double lo, double hi, int iters) {
  const double r = 0.3819660112501051;
  double a = lo, b = hi;
  double m1 = a + r * (b - a), m2 = b - r * (b - a);
  double f1 = fn(m1), f2 = fn(m2);
  for (int it = 0; it < iters; ++it) {
    if (f1 < f2) {
      a = m1;
      m1 = m2;
      f1 = f2;
      m2 = b - r * (b - a);
      f2 = fn(m2);
    } else {
      b = m2;
      m2 = m1;
      f2 = f1;
      m1 = a + r * (b - a);
      f1 = fn(m1);
    }
  }
  return 0.5 * (a + b);
}

// Entropy of the tilted profile u = Lambda'(s) through the Legendre
// identity H(Lambda'(s)) = s Lambda'(s) - Lambda(s); exact, no inner solve.
double tilted_entropy_term(const FieldLaw& law, double s) {
  if (s == 0.0) return 0.0;
  return s * log_mgf_prime(law, s) - log_mgf(law, s);
}

struct MuStep {
  bool ok = false;
  double alpha = 0.0;
  double pair = 0.0;
  double kinetic = 0.0;
  std::vector<double> rho;  // ground density, sum rho h^d = 1
};

// Per-grid state: eigen warm start plus solve counting.
struct Solver {
  Grid grid;
  const FieldLaw& law;
  const RateSettings& s;
  std::vector<double> warm;
  int eigen_solves = 0;

  Solver(const Grid& g, const FieldLaw& l, const RateSettings& settings)
      : grid(g), law(l), s(settings) {}

  EigenResult eig(const std::vector<double>& V) {
    EigenResult e = principal_eigenvalue(V, grid, s.eigen_tol(),
                                         warm.empty() ? nullptr : &warm);
    warm = e.eigenvector;
    ++eigen_solves;
    return e;
  }

  double pair_raw(const std::vector<double>& rho, const std::vector<double>& u) const {
    double p = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) p += rho[i] * u[i];
    return p * grid.cell_volume();
  }

  // Minimize L(mu) subject to <mu,u> = y at fixed u: the minimizer is the
  // ground density of alpha*u with the multiplier alpha matched to the
  // pairing target (<mu_alpha, u> is increasing in alpha).
  MuStep mu_step(const std::vector<double>& u, double y, double alpha_guess) {
    MuStep out;
    // <mu,u> never leaves [min u, max u]; skip unreachable targets before
    // the multiplier search can run away.
    double u_lo = u[0], u_hi = u[0];
    for (double v : u) {
      u_lo = std::min(u_lo, v);
      u_hi = std::max(u_hi, v);
    }
    if (y > u_hi + 1e-12 || y < u_lo - 1e-12) return out;
    std::vector<double> V(u.size());
    auto pair_at = [&](double alpha) {
      for (std::size_t i = 0; i < u.size(); ++i) V[i] = alpha * u[i];
      EigenResult e = eig(V);
      out.alpha = alpha;
      out.rho.resize(e.eigenvector.size());
      for (std::size_t i = 0; i < out.rho.size(); ++i)
        out.rho[i] = e.eigenvector[i] * e.eigenvector[i];
      out.kinetic = 0.5 * dirichlet_energy(grid, e.eigenvector);
      out.pair = pair_raw(out.rho, u);
      return out.pair - y;
    };
    const double ftol = std::min(0.5 * s.feas_tol, 1e-5);
    Bracket b = expand_bracket(pair_at, alpha_guess, 1.0, s.multiplier_cap, ftol);
    if (!b.ok) return out;
    double alpha = illinois_root(pair_at, b, ftol, 80);
    if (std::fabs(out.pair - y) > 10.0 * ftol) pair_at(alpha);
    out.ok = std::fabs(out.pair - y) <= s.feas_tol;
    return out;
  }

  // Minimize I(u) subject to <mu,u> = y at fixed mu: pointwise
  // u = Lambda'(c rho) with c matched to the target.
  struct UStep {
    std::vector<double> u;
    double entropy = 0.0;
    double c = 0.0;
  };

  UStep u_step_pairing(const std::vector<double>& rho, double y, double c_guess) {
    UStep out;
    out.u.resize(rho.size());
    auto pair_at = [&](double c) {
      double p = 0.0;
      for (std::size_t i = 0; i < rho.size(); ++i)
        p += rho[i] * log_mgf_prime(law, c * rho[i]);
      return p * grid.cell_volume() - y;
    };
    Bracket b = expand_bracket(pair_at, c_guess, 1.0, 1e9, 1e-11);
    double c = b.ok ? illinois_root(pair_at, b, 1e-11, 200) : 0.0;
    out.c = c;
    double entropy = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
      double sarg = c * rho[i];
      out.u[i] = std::clamp(log_mgf_prime(law, sarg), -1.0, 1.0);
      entropy += tilted_entropy_term(law, sarg);
    }
    out.entropy = entropy * grid.cell_volume();
    return out;
  }

  // Maximize alpha <u, rho> over I(u) <= budget: u = Lambda'(alpha rho /
  // kappa) with the entropy multiplier kappa found by bisection; kappa ->
  // infinity sends u to 0, so the constraint set is always reachable.
  UStep u_step_budget(const std::vector<double>& rho, double alpha, double budget) {
    UStep out;
    out.u.assign(rho.size(), 0.0);
    if (alpha == 0.0 || budget <= 0.0) return out;
    const double vol = grid.cell_volume();
    auto entropy_at = [&](double kappa) {
      double e = 0.0;
      for (double r : rho) e += tilted_entropy_term(law, alpha * r / kappa);
      return e * vol;
    };
    double kappa = 1.0;
    double e1 = entropy_at(kappa);
    if (e1 > budget) {
      double hi = kappa;
      while (entropy_at(hi) > budget && hi < 1e14) hi *= 4.0;
      double lo = kappa;
      for (int it = 0; it < 200; ++it) {
        double mid = std::sqrt(lo * hi);
        if (entropy_at(mid) > budget) lo = mid; else hi = mid;
        if (hi / lo < 1.0 + 1e-12) break;
      }
      kappa = hi;  // feasible side
    } else {
      double lo = kappa;
      while (entropy_at(lo) < budget && lo > 1e-14) lo *= 0.25;
      if (entropy_at(lo) < budget) {
        kappa = lo;  // constraint inactive even near saturation
      } else {
        double hi = kappa;
        for (int it = 0; it < 200; ++it) {
          double mid = std::sqrt(lo * hi);
          if (entropy_at(mid) > budget) lo = mid; else hi = mid;
          if (hi / lo < 1.0 + 1e-12) break;
        }
        kappa = hi;
      }
    }
    double entropy = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
      double sarg = alpha * rho[i] / kappa;
      out.u[i] = std::clamp(log_mgf_prime(law, sarg), -1.0, 1.0);
      entropy += tilted_entropy_term(law, sarg);
    }
    out.entropy = entropy * vol;
    out.c = kappa;
    return out;
  }

  double profile_entropy(const std::vector<double>& u) const {
    double e = 0.0;
    for (double v : u) {
      ExtReal h = cramer(law, v);
      if (!h.finite) return std::numeric_limits<double>::infinity();
      e += h.value;
    }
    return e * grid.cell_volume();
  }

  // Shrink u toward zero until I(u) <= budget (H decreases toward 0).
  void project_entropy(std::vector<double>& u, double budget) {
    if (profile_entropy(u) <= budget) return;
    double lo = 0.0, hi = 1.0;
    std::vector<double> scaled(u.size());
    for (int it = 0; it < 60; ++it) {
      double t = 0.5 * (lo + hi);
      for (std::size_t i = 0; i < u.size(); ++i) scaled[i] = t * u[i];
      if (profile_entropy(scaled) <= budget) lo = t; else hi = t;
    }
    for (double& v : u) v *= lo;
  }
};

std::vector<std::vector<double>> make_starts(const Grid& g, const FieldLaw& law,
                                             double level, double budget,
                                             const RateSettings& s) {
  std::vector<std::vector<double>> starts;
  double sign = level >= 0.0 ? 1.0 : -1.0;
  double inner_m = 0.98 * law.m, inner_M = 0.98 * law.M;
  double sat = sign >= 0.0 ? inner_M : inner_m;

  starts.emplace_back(g.cells(), std::clamp(level, inner_m, inner_M));

  // plateaus on a central box, from shallow to saturated; under an entropy
  // budget the width is chosen to spend most of it
  auto add_bump = [&](double q) {
    double width = std::min(g.A * 0.8, 1.0);
    ExtReal hq = cramer(law, q);
    if (budget > 0.0 && hq.finite && hq.value > 0.0)
      width = std::min(g.A * 0.8, std::pow(0.9 * budget / hq.value, 1.0 / g.dim));
    std::vector<double> bump(g.cells(), 0.0);
    for (std::size_t i = 0; i < bump.size(); ++i) {
      auto c = g.unflat(i);
      bool inside = true;
      for (int a = 0; a < g.dim; ++a)
        if (std::fabs(g.center(c[a])) > 0.5 * width) inside = false;
      if (inside) bump[i] = q;
    }
    starts.push_back(std::move(bump));
  };
  add_bump(sat);
  add_bump(std::clamp(sign * std::max(0.6 * std::fabs(sat), std::fabs(level)),
                      inner_m, inner_M));
  add_bump(std::clamp(sign * 0.5 * std::fabs(sat), inner_m, inner_M));

  // constant profile fitted to the budget when one applies
  if (budget > 0.0) {
    double lo = 0.0, hi = std::fabs(sat);
    for (int it = 0; it < 50; ++it) {
      double q = 0.5 * (lo + hi);
      ExtReal hq = cramer(law, sign * q);
      double total = (hq.finite ? hq.value : 1e300);
      for (int a = 0; a < g.dim; ++a) total *= g.A;
      if (total > 0.9 * budget) hi = q; else lo = q;
    }
    starts.emplace_back(g.cells(), sign * lo);
  }

  // random dyadic-level plateaus (smooth shapes; cell-wise noise creates
  // near-degenerate disordered wells that only slow the eigen solves)
  Prng rng(mix64(s.seed, 0x5EED));
  for (int k = 0; k < s.n_random_starts; ++k) {
    std::vector<double> u(g.cells(), 0.0);
    int blobs = 1 + static_cast<int>(rng.next_u64() % 3);
    for (int b = 0; b < blobs; ++b) {
      double lvl = std::clamp((static_cast<int>(rng.next_u64() % 9) - 4) / 4.0,
                              inner_m, inner_M);
      std::array<double, 3> center;
      for (int a = 0; a < g.dim; ++a)
        center[a] = (rng.uniform() - 0.5) * g.A * 0.8;
      double half = (0.15 + 0.35 * rng.uniform()) * g.A * 0.5;
      for (std::size_t i = 0; i < u.size(); ++i) {
        auto c = g.unflat(i);
        bool inside = true;
        for (int a = 0; a < g.dim; ++a)
          if (std::fabs(g.center(c[a]) - center[a]) > half) inside = false;
        if (inside) u[i] = lvl;
      }
    }
    starts.push_back(std::move(u));
  }
  return starts;
}

struct PairCandidate {
  bool found = false;
  double objective = std::numeric_limits<double>::infinity();
  double entropy = 0.0;
  double kinetic = 0.0;
  double pair = 0.0;
  std::vector<double> u;
  std::vector<double> rho;
};

// Alternating minimization of I(u) + L(mu) under <mu,u> = y; every iterate
// is feasible, and both coordinate steps are exact minimizations, so the
// objective decreases monotonically per start.
PairCandidate annealed_solve(Solver& solver, double y, double budget_unused,
                             const std::vector<std::vector<double>>& starts,
                             int* alternations_out) {
  (void)budget_unused;
  PairCandidate best;
  int total_alt = 0;
  for (const auto& start : starts) {
    std::vector<double> u = start;
    double alpha_guess = 0.0;
    double prev = std::numeric_limits<double>::infinity();
    for (int it = 0; it < solver.s.max_alternations; ++it) {
      ++total_alt;
      MuStep mu = solver.mu_step(u, y, alpha_guess);
      if (!mu.ok) break;
      alpha_guess = mu.alpha;
      double entropy_u = solver.profile_entropy(u);
      double objective = entropy_u + mu.kinetic;
      if (objective < best.objective) {
        best.found = true;
        best.objective = objective;
        best.entropy = entropy_u;
        best.kinetic = mu.kinetic;
        best.pair = mu.pair;
        best.u = u;
        best.rho = mu.rho;
      }
      auto ustep = solver.u_step_pairing(mu.rho, y, alpha_guess);
      double objective_after = ustep.entropy + mu.kinetic;
      if (objective_after < best.objective) {
        best.objective = objective_after;
        best.entropy = ustep.entropy;
        best.kinetic = mu.kinetic;
        best.pair = solver.pair_raw(mu.rho, ustep.u);
        best.u = ustep.u;
        best.rho = mu.rho;
      }
      u = std::move(ustep.u);
      if (std::fabs(prev - objective_after) <=
          solver.s.obj_tol * (1.0 + std::fabs(objective_after)))
        break;
      prev = objective_after;
    }
  }
  if (alternations_out) *alternations_out = total_alt;
  return best;
}

// inf lambda(alpha u) over I(u) <= budget; both steps exact, lambda
// decreases monotonically along the alternation.
double quenched_solve(Solver& solver, double alpha, double budget,
                      const std::vector<std::vector<double>>& starts,
                      std::vector<double>* best_u = nullptr) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> V(solver.grid.cells());
  for (const auto& start : starts) {
    std::vector<double> u = start;
    solver.project_entropy(u, budget);
    double prev = std::numeric_limits<double>::infinity();
    for (int it = 0; it < solver.s.max_alternations; ++it) {
      for (std::size_t i = 0; i < u.size(); ++i) V[i] = alpha * u[i];
      EigenResult e = solver.eig(V);
      if (e.lambda < best) {
        best = e.lambda;
        if (best_u) *best_u = u;
      }
      if (std::fabs(prev - e.lambda) <= solver.s.obj_tol * (1.0 + std::fabs(e.lambda)))
        break;
      prev = e.lambda;
      std::vector<double> rho(e.eigenvector.size());
      for (std::size_t i = 0; i < rho.size(); ++i)
        rho[i] = e.eigenvector[i] * e.eigenvector[i];
      u = solver.u_step_budget(rho, alpha, budget).u;
    }
  }
  return best;
}

// inf L(mu) over <mu,u> = y, I(u) <= budget; the mu-step keeps iterates
// feasible and the u-step re-spends the entropy budget along the current
// ground density.
PairCandidate j1_solve(Solver& solver, double y, double budget,
                       const std::vector<std::vector<double>>& starts) {
  PairCandidate best;
  for (const auto& start : starts) {
    std::vector<double> u = start;
    solver.project_entropy(u, budget);
    double alpha_guess = 0.0;
    int stale = 0;
    for (int it = 0; it < solver.s.max_alternations && stale < 3; ++it) {
      MuStep mu = solver.mu_step(u, y, alpha_guess);
      if (!mu.ok) break;
      alpha_guess = mu.alpha;
      if (mu.kinetic < best.objective - solver.s.obj_tol * (1.0 + mu.kinetic)) {
        stale = 0;
      } else {
        ++stale;
      }
      if (mu.kinetic < best.objective) {
        best.found = true;
        best.objective = mu.kinetic;
        best.kinetic = mu.kinetic;
        best.entropy = solver.profile_entropy(u);
        best.pair = mu.pair;
        best.u = u;
        best.rho = mu.rho;
      }
      u = solver.u_step_budget(mu.rho, mu.alpha == 0.0 ? (y >= 0 ? 1.0 : -1.0)
                                                       : mu.alpha,
                               budget)
              .u;
    }
  }
  return best;
}

VariationalResult package(const PairCandidate& cand, const Grid& g, double y,
                          int eigen_solves, int alternations) {
  VariationalResult out;
  out.value = ExtReal(cand.objective);
  out.achieved_y = cand.pair;
  out.feasibility_gap = std::fabs(cand.pair - y);
  out.entropy = cand.entropy;
  out.kinetic = cand.kinetic;
  out.feasible = cand.found;
  out.eigen_solves = eigen_solves;
  out.alternations = alternations;
  out.best_u = Profile(g, cand.u);
  out.best_mu = Density::normalized(g, cand.rho);
  return out;
}

void check_interior(double y, const FieldLaw& law) {
  if (!(y > law.m && y < law.M))
    throw std::invalid_argument("target must lie in the open interval ]m, M[");
}

}  // namespace

VariationalResult annealed_rate(double y, const FieldLaw& law, const RateSettings& s) {
  check_interior(y, law);
  Grid base = s.base_grid();
  Solver solver(base, law, s);
  auto starts = make_starts(base, law, y, -1.0, s);
  int alternations = 0;
  PairCandidate cand = annealed_solve(solver, y, 0.0, starts, &alternations);
  if (!cand.found) throw InfeasibleError(y, cand.pair);

  VariationalResult out = package(cand, base, y, solver.eigen_solves, alternations);
  if (s.extrapolate) {
    Grid doubled(s.dim, 2.0 * s.A, s.N);
    Solver solver2(doubled, law, s);
    auto starts2 = make_starts(doubled, law, y, -1.0, s);
    PairCandidate cand2 = annealed_solve(solver2, y, 0.0, starts2, nullptr);
    out.eigen_solves += solver2.eigen_solves;
    if (cand2.found) {
      double ext = (4.0 * cand2.objective - cand.objective) / 3.0;
      out.value = ExtReal(std::max(0.0, ext));
    }
  }
  return out;
}

ProductFormResult annealed_rate_product_form(double y, const FieldLaw& law,
                                             const RateSettings& s) {
  check_interior(y, law);
  const double d = s.dim;
  ProductFormResult out;
  out.c_d = std::pow(2.0 / d, d / (d + 2.0)) * (1.0 + d / 2.0);

  auto product_of = [&](double I, double L) {
    if (I <= 0.0 || L <= 0.0) return 0.0;
    return out.c_d * std::pow(I, 2.0 / (d + 2.0)) * std::pow(L, d / (d + 2.0));
  };

  RateSettings fixed = s;
  fixed.extrapolate = false;
  double best_product = std::numeric_limits<double>::infinity();
  double bi = 0.0, bl = 0.0;
  for (double box : {s.A, 2.0 * s.A}) {
    RateSettings run = fixed;
    run.A = box;
    VariationalResult r = annealed_rate(y, law, run);
    double p = product_of(r.entropy, r.kinetic);
    if (p < best_product) {
      best_product = p;
      bi = r.entropy;
      bl = r.kinetic;
    }
    if (!s.extrapolate) break;
  }
  out.value = ExtReal(best_product);
  out.entropy = bi;
  out.kinetic = bl;
  if (bi > 0.0 && bl > 0.0) {
    out.best_A = std::pow(2.0 * bl / (d * bi), 1.0 / (d + 2.0));
    out.dilation_min =
        bi * std::pow(out.best_A, d) + bl / (out.best_A * out.best_A);
  } else {
    out.best_A = 0.0;
    out.dilation_min = 0.0;
  }
  return out;
}

ExtReal dual_upper(double y, const Density& f, const FieldLaw& law) {
  if (y <= 0.0) return ExtReal(0.0);
  const double vol = f.grid.cell_volume();
  auto objective = [&](double a) {
    double integral = 0.0;
    for (double v : f.values) integral += log_mgf(law, a * v);
    return a * y - integral * vol;
  };
  auto slope = [&](double a) {
    double s = 0.0;
    for (double v : f.values) s += v * log_mgf_prime(law, a * v);
    return y - s * vol;
  };
  const double a_cap = 1e8;
  double hi = 1.0;
  while (slope(hi) > 0.0 && hi < a_cap) hi *= 2.0;
  if (hi >= a_cap && slope(hi) > 0.0) return ExtReal::infinity();  // unbounded ascent
  double a_star = golden_max(objective, 0.0, hi, 200);
  return ExtReal(std::max(0.0, objective(a_star)));
}

DualityCheck duality_check(double y, const Density& f, const FieldLaw& law) {
  DualityCheck out;
  if (y >= law.M) {
    out.primal = ExtReal::infinity();
    out.dual = ExtReal::infinity();
    out.gap = 0.0;
    return out;
  }
  if (y <= 0.0) {
    out.primal = ExtReal(0.0);  // u == 0 is feasible
    out.dual = dual_upper(y, f, law);
    out.gap = out.primal.value - out.dual.value;
    return out;
  }
  const double vol = f.grid.cell_volume();
  auto pair_at = [&](double a) {
    double p = 0.0;
    for (double v : f.values) p += v * log_mgf_prime(law, a * v);
    return p * vol - y;
  };
  Bracket b = expand_bracket(pair_at, 1.0, 1.0, 1e9, 1e-11);
  if (!b.ok) {
    out.primal = ExtReal::infinity();
    out.dual = dual_upper(y, f, law);
    out.gap = 0.0;
    return out;
  }
  double a = illinois_root(pair_at, b, 1e-11, 200);
  // entropy through the independent Cramer solver, not the tilt identity
  double entropy = 0.0;
  for (double v : f.values) {
    double u = std::clamp(log_mgf_prime(law, a * v), -1.0, 1.0);
    ExtReal h = cramer(law, u);
    entropy += h.value;
  }
  out.primal = ExtReal(entropy * vol);
  out.dual = dual_upper(y, f, law);
  out.gap = out.primal.value - out.dual.as_double();
  return out;
}

// Free ground energy of the box; quenched values are reported relative to
// it. The whole-space functionals vanish at zero coupling, and centering
// restores that exactly at any finite box while removing the leading
// truncation term.
double free_floor(const Grid& g, double tol) {
  std::vector<double> zeros(g.cells(), 0.0);
  return principal_eigenvalue(zeros, g, tol).lambda;
}

QuenchedDetail quenched_l_detail(double alpha, const FieldLaw& law,
                                 const RateSettings& s) {
  QuenchedDetail out;
  Grid base = s.base_grid();
  if (alpha == 0.0) {  // lambda(0, R^d) = 0, exact
    out.best_u = Profile::constant(base, 0.0);
    return out;
  }
  const double budget = static_cast<double>(s.dim);
  const double bound_lo = alpha >= 0.0 ? -alpha * law.M : -alpha * law.m;
  Solver solver(base, law, s);
  auto starts = make_starts(base, law, alpha >= 0.0 ? 0.5 : -0.5, budget, s);
  std::vector<double> ubest;
  double l_base =
      quenched_solve(solver, alpha, budget, starts, &ubest) - free_floor(base, s.eigen_tol());
  out.base_value = l_base;
  out.best_u = Profile(base, ubest);
  out.entropy = solver.profile_entropy(ubest);
  if (!s.extrapolate) {
    out.value = l_base;
    return out;
  }
  Grid doubled(s.dim, 2.0 * s.A, s.N);
  Solver solver2(doubled, law, s);
  auto starts2 = make_starts(doubled, law, alpha >= 0.0 ? 0.5 : -0.5, budget, s);
  double l_doubled = quenched_solve(solver2, alpha, budget, starts2) -
                     free_floor(doubled, s.eigen_tol());
  double ext = (4.0 * l_doubled - l_base) / 3.0;
  out.value = std::clamp(ext, bound_lo, 0.0);
  return out;
}

double quenched_l(double alpha, const FieldLaw& law, const RateSettings& s) {
  return quenched_l_detail(alpha, law, s).value;
}

void LegendrePair::insert(double alpha, double l) {
  auto it = std::lower_bound(alphas.begin(), alphas.end(), alpha);
  std::size_t pos = static_cast<std::size_t>(it - alphas.begin());
  if (it != alphas.end() && *it == alpha) {
    l_values[pos] = l;
    return;
  }
  alphas.insert(it, alpha);
  l_values.insert(l_values.begin() + pos, l);
}

bool LegendrePair::contains(double alpha) const {
  return std::binary_search(alphas.begin(), alphas.end(), alpha);
}

LegendrePair default_l_table(const FieldLaw& law, const RateSettings& s,
                             double alpha_max, int per_side) {
  std::vector<double> alphas{0.0};
  for (int k = 0; k < per_side; ++k) {
    double a = alpha_max * std::pow(2.0, -k);
    alphas.push_back(a);
    alphas.push_back(-a);
  }
  std::sort(alphas.begin(), alphas.end());
  LegendrePair table;
  table.alphas = alphas;
  table.l_values.assign(alphas.size(), 0.0);
  for (std::size_t i = 0; i < alphas.size(); ++i)
    table.l_values[i] = quenched_l(alphas[i], law, s);
  return table;
}

ExtReal quenched_J(double y, const FieldLaw& law, const RateSettings& s,
                   LegendrePair& table) {
  if (y < law.m || y > law.M) return ExtReal::infinity();
  if (!table.contains(0.0)) table.insert(0.0, 0.0);
  const double alpha_limit = 1024.0;
  for (int round = 0; round < 16; ++round) {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t i = 0; i < table.alphas.size(); ++i) {
      double v = table.alphas[i] * y + table.l_values[i];
      if (v > best) {
        best = v;
        arg = i;
      }
    }
    bool at_low = arg == 0;
    bool at_high = arg + 1 == table.alphas.size();
    if (!at_low && !at_high) return ExtReal(std::max(0.0, best));
    double edge = at_high ? table.alphas.back() : table.alphas.front();
    double next = edge == 0.0 ? (at_high ? 1.0 : -1.0) : 2.0 * edge;
    if (std::fabs(next) > alpha_limit)
      throw GridExtensionError("multiplier grid exhausted while maximizing the transform");
    table.insert(next, quenched_l(next, law, s));
  }
  throw GridExtensionError("multiplier grid kept extending without an interior maximizer");
}

VariationalResult j1_rate(double y, const FieldLaw& law, const RateSettings& s) {
  check_interior(y, law);
  const double budget = static_cast<double>(s.dim) - s.eps_strict;
  Grid base = s.base_grid();
  Solver solver(base, law, s);
  auto starts = make_starts(base, law, y, budget, s);
  PairCandidate cand = j1_solve(solver, y, budget, starts);
  if (!cand.found) throw InfeasibleError(y, cand.pair);

  VariationalResult out = package(cand, base, y, solver.eigen_solves, 0);
  double centered = cand.kinetic - free_floor(base, s.eigen_tol());
  out.value = ExtReal(std::max(0.0, centered));
  if (s.extrapolate) {
    Grid doubled(s.dim, 2.0 * s.A, s.N);
    Solver solver2(doubled, law, s);
    // dilation keeps the pairing and shrinks the entropy, so the budget
    // stays feasible on the doubled box
    auto starts2 = make_starts(doubled, law, y, budget, s);
    PairCandidate cand2 = j1_solve(solver2, y, budget, starts2);
    out.eigen_solves += solver2.eigen_solves;
    if (cand2.found) {
      double centered2 = cand2.kinetic - free_floor(doubled, s.eigen_tol());
      double ext = (4.0 * centered2 - centered) / 3.0;
      out.value = ExtReal(std::max(0.0, ext));
    }
  }
  return out;
}

std::vector<ExtReal> jp_combine(const std::vector<double>& ys,
                                const std::vector<ExtReal>& values) {
  const std::size_t n = ys.size();
  std::vector<ExtReal> out = values;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!values[i].finite) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!values[j].finite) continue;
        if (ys[i] > ys[k] || ys[j] < ys[k]) continue;
        double span = ys[j] - ys[i];
        if (span <= 0.0) continue;
        double t = (ys[k] - ys[i]) / span;
        double mix = (1.0 - t) * values[i].value + t * values[j].value;
        if (!out[k].finite || mix < out[k].value) out[k] = ExtReal(mix);
      }
    }
  }
  return out;
}

std::vector<ExtReal> convexify_by_mixtures(const std::vector<double>& ys,
                                           const std::vector<ExtReal>& values) {
  std::vector<ExtReal> cur = values;
  for (std::size_t round = 0; round < ys.size() + 2; ++round) {
    std::vector<ExtReal> next = jp_combine(ys, cur);
    bool changed = false;
    for (std::size_t i = 0; i < next.size(); ++i) {
      if (next[i].finite != cur[i].finite ||
          (next[i].finite && std::fabs(next[i].value - cur[i].value) > 1e-15))
        changed = true;
    }
    cur = std::move(next);
    if (!changed) break;
  }
  return cur;
}

double r_of_t(double t, int dim) {
  if (!(t > 0.0)) throw std::invalid_argument("horizon must be positive");
  if (dim < 1 || dim > 3) throw std::invalid_argument("dim must be 1, 2 or 3");
  auto forward = [&](double r) { return r * r * std::exp(std::pow(r, dim)); };
  double lo = 0.0, hi = 1.0;
  while (forward(hi) < t) hi *= 2.0;
  double r = 0.5 * hi;
  for (int it = 0; it < 200; ++it) {
    double fr = forward(r);
    if (std::fabs(fr - t) <= 1e-12 * t) break;
    double rd = std::pow(r, dim);
    double deriv = (2.0 * r + dim * rd * r) * std::exp(rd);
    double next = r - (fr - t) / deriv;
    if (fr > t) hi = r; else lo = r;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    r = next;
  }
  return r;
}

RateCurve build_rate_curve(const std::string& kind, const std::vector<double>& xs,
                           const FieldLaw& law, const RateSettings& s, int threads) {
  RateCurve curve;
  curve.kind = kind;
  curve.law = law;
  curve.settings = s;
  curve.points.resize(xs.size());

  if (kind == "quenched_J") {
    LegendrePair table = default_l_table(law, s);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      curve.points[i].x = xs[i];
      if (xs[i] == 0.0) {
        curve.points[i].value = ExtReal(0.0);
        continue;
      }
      try {
        curve.points[i].value = quenched_J(xs[i], law, s, table);
      } catch (const GridExtensionError&) {
        curve.points[i].value = ExtReal::infinity();
      }
    }
    return curve;
  }

  auto eval_point = [&](std::size_t i) {
    double x = xs[i];
    CurvePoint& p = curve.points[i];
    p.x = x;
    try {
      if (kind == "annealed") {
        if (x == 0.0) {
          p.value = ExtReal(0.0);
        } else if (x <= law.m || x >= law.M) {
          p.value = ExtReal::infinity();
        } else {
          VariationalResult r = annealed_rate(x, law, s);
          p.value = r.value;
          p.feasibility = r.feasibility_gap;
        }
      } else if (kind == "annealed_product") {
        if (x == 0.0) {
          p.value = ExtReal(0.0);
        } else if (x <= law.m || x >= law.M) {
          p.value = ExtReal::infinity();
        } else {
          p.value = annealed_rate_product_form(x, law, s).value;
        }
      } else if (kind == "j1") {
        if (x == 0.0) {
          // u == 0 is feasible, so the infimum is the free value; centered
          // it vanishes identically
          p.value = ExtReal(0.0);
        } else if (x <= law.m || x >= law.M) {
          p.value = ExtReal::infinity();
        } else {
          VariationalResult r = j1_rate(x, law, s);
          p.value = r.value;
          p.feasibility = r.feasibility_gap;
        }
      } else if (kind == "quenched_l") {
        p.value = ExtReal(quenched_l(x, law, s));
      } else {
        throw std::invalid_argument("unknown curve kind: " + kind);
      }
    } catch (const InfeasibleError& e) {
      p.value = ExtReal::infinity();
      p.feasibility = std::fabs(e.achieved_y - x);
    }
  };
  parallel_for(xs.size(), threads, eval_point);
  return curve;
}

}  // namespace lds
