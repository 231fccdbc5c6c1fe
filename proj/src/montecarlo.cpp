#include "lds/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <unordered_set>

#include "lds/parallel.hpp"
#include "lds/rng.hpp"
#include "lds/ratefn.hpp"
#include "lds/spectral.hpp"

namespace lds {

namespace {

constexpr uint64_t kGaussTag = 0x6741;
constexpr uint64_t kFieldTag = 0xF1E1;

// Fixed-size chunks accumulated in index order: results do not depend on
// the worker count.
constexpr long kChunk = 4096;

void accumulate_chunked(long n, int threads, std::size_t acc_size,
                        const std::function<void(long, std::vector<double>&)>& item,
                        std::vector<double>& out) {
  long chunks = (n + kChunk - 1) / kChunk;
  std::vector<std::vector<double>> partial(chunks, std::vector<double>(acc_size, 0.0));
  parallel_for(static_cast<std::size_t>(chunks), threads, [&](std::size_t c) {
    long lo = static_cast<long>(c) * kChunk;
    long hi = std::min(n, lo + kChunk);
    for (long i = lo; i < hi; ++i) item(i, partial[c]);
  });
  out.assign(acc_size, 0.0);
  for (long c = 0; c < chunks; ++c)
    for (std::size_t j = 0; j < acc_size; ++j) out[j] += partial[c][j];
}

struct WilsonResult {
  double lo, hi;
};

WilsonResult wilson_interval(long hits, long n) {
  const double z = 1.0;
  double p = static_cast<double>(hits) / n;
  double denom = 1.0 + z * z / n;
  double center = (p + z * z / (2.0 * n)) / denom;
  double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
  return {std::max(center - half, 1e-300), std::min(center + half, 1.0)};
}

Estimate frequency_estimate(long hits, long n) {
  Estimate e;
  e.n = n;
  e.hits = hits;
  double p = static_cast<double>(hits) / n;
  e.mean = p;
  e.stderr_ = std::sqrt(std::max(p * (1.0 - p), 0.0) / n);
  if (hits == 0) {
    e.zero_hits = true;
    return e;
  }
  auto w = wilson_interval(hits, n);
  e.logprob = std::log(p);
  e.logprob_stderr = 0.5 * (std::log(w.hi) - std::log(w.lo));
  return e;
}

struct Ols {
  double slope = 0.0, intercept = 0.0, r2 = 0.0;
};

Ols least_squares(const std::vector<double>& xs, const std::vector<double>& ys) {
  Ols out;
  std::size_t n = xs.size();
  if (n < 2) return out;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  out.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return out;
}

// One annealed path: Gaussian increments from the path stream, scenery
// values drawn lazily per visited cell from the path's own field stream.
double annealed_path_average(const FieldLaw& law, const WalkConfig& cfg,
                             uint64_t path_seed) {
  Prng rng(mix64(path_seed, kGaussTag));
  const uint64_t field_seed = mix64(path_seed, kFieldTag);
  const double sqrt_dt = std::sqrt(cfg.dt);
  const long steps = cfg.steps();
  double pos[3] = {0.0, 0.0, 0.0};
  std::array<int, 3> site = {0, 0, 0};
  double acc = 0.0;
  for (long k = 0; k < steps; ++k) {
    for (int a = 0; a < cfg.dim; ++a) site[a] = integer_part(pos[a]);
    acc += site_value(law, field_seed, pack_site(site, cfg.dim));
    for (int a = 0; a < cfg.dim; ++a) pos[a] += sqrt_dt * rng.gaussian();
  }
  return acc / static_cast<double>(steps);
}

// Quenched path on a frozen scenery; the box is sized by the caller so
// that clamping at its edge is an ~1e-9 tail event.
double quenched_path_average(const Scenery& scenery, const WalkConfig& cfg,
                             uint64_t path_seed) {
  Prng rng(mix64(path_seed, kGaussTag));
  const double sqrt_dt = std::sqrt(cfg.dt);
  const long steps = cfg.steps();
  const int hw = scenery.halfwidth;
  double pos[3] = {0.0, 0.0, 0.0};
  std::array<int, 3> site = {0, 0, 0};
  double acc = 0.0;
  for (long k = 0; k < steps; ++k) {
    for (int a = 0; a < cfg.dim; ++a)
      site[a] = std::clamp(integer_part(pos[a]), -hw, hw);
    acc += scenery.values[scenery.flat_index(site)];
    for (int a = 0; a < cfg.dim; ++a) pos[a] += sqrt_dt * rng.gaussian();
  }
  return acc / static_cast<double>(steps);
}

int quenched_halfwidth(double t, int dim) {
  return static_cast<int>(std::ceil(6.0 * std::sqrt(t * dim))) + 2;
}

double tilted_site_value(const FieldLaw& law, double beta, uint64_t seed,
                         uint64_t site_key) {
  uint64_t bits = mix64(seed, site_key);
  double u = u01(bits);
  switch (law.kind) {
    case LawKind::rademacher: {
      double p_plus = std::exp(beta) / (std::exp(beta) + std::exp(-beta));
      return u <= p_plus ? 1.0 : -1.0;
    }
    case LawKind::uniform_symmetric: {
      // inverse CDF of e^{beta x} / Z on [-1, 1]
      double e_lo = std::exp(-beta), e_hi = std::exp(beta);
      return std::log(e_lo + u * (e_hi - e_lo)) / beta;
    }
    default: {
      double z = 0.0;
      for (std::size_t i = 0; i < law.atoms.size(); ++i)
        z += law.probs[i] * std::exp(beta * law.atoms[i]);
      double acc = 0.0;
      for (std::size_t i = 0; i + 1 < law.atoms.size(); ++i) {
        acc += law.probs[i] * std::exp(beta * law.atoms[i]) / z;
        if (u <= acc) return law.atoms[i];
      }
      return law.atoms.back();
    }
  }
}

}  // namespace

void WalkConfig::validate() const {
  if (dim < 1 || dim > 3) throw std::invalid_argument("walk dim must be 1, 2 or 3");
  if (!(dt > 0.0 && dt <= t / 100.0))
    throw std::invalid_argument("need 0 < dt <= t/100");
}

long WalkConfig::steps() const { return std::lround(t / dt); }

double occupation_functional(const Scenery& scenery, const WalkConfig& cfg) {
  cfg.validate();
  if (scenery.dim != cfg.dim) throw std::invalid_argument("dimension mismatch");
  Prng rng(mix64(cfg.seed, kGaussTag));
  const double sqrt_dt = std::sqrt(cfg.dt);
  const long steps = cfg.steps();
  double pos[3] = {0.0, 0.0, 0.0};
  std::array<int, 3> site = {0, 0, 0};
  double acc = 0.0;
  for (long k = 0; k < steps; ++k) {
    for (int a = 0; a < cfg.dim; ++a) site[a] = integer_part(pos[a]);
    if (!scenery.contains(site))
      throw std::out_of_range("walk left the scenery box at time t=" +
                              std::to_string(k * cfg.dt));
    acc += scenery.values[scenery.flat_index(site)];
    for (int a = 0; a < cfg.dim; ++a) pos[a] += sqrt_dt * rng.gaussian();
  }
  return acc / static_cast<double>(steps);
}

Estimate annealed_tail(const FieldLaw& law, const WalkConfig& cfg, double y,
                       long n, const TailOptions& opts) {
  cfg.validate();
  if (n < 1) throw std::invalid_argument("need at least one path");

  if (opts.tilt_beta == 0.0) {
    std::vector<double> acc;
    accumulate_chunked(n, opts.threads, 1,
                       [&](long i, std::vector<double>& a) {
                         double x = annealed_path_average(law, cfg, mix64(cfg.seed, i));
                         if (x >= y) a[0] += 1.0;
                       },
                       acc);
    return frequency_estimate(static_cast<long>(acc[0]), n);
  }

  // Exponential tilt over the scenery inside the walk's range. The
  // likelihood ratio over the visited sites is exp(-beta S + V Lambda(beta))
  // with S the sum of the tilted values and V the visited count.
  const double beta = opts.tilt_beta;
  const double lambda_beta = log_mgf(law, beta);
  const double sqrt_dt = std::sqrt(cfg.dt);
  const long steps = cfg.steps();
  std::vector<double> acc;
  accumulate_chunked(
      n, opts.threads, 2,
      [&](long i, std::vector<double>& a) {
        uint64_t path_seed = mix64(cfg.seed, i);
        Prng rng(mix64(path_seed, kGaussTag));
        uint64_t field_seed = mix64(path_seed, kFieldTag);
        double pos[3] = {0.0, 0.0, 0.0};
        std::array<int, 3> site = {0, 0, 0};
        std::unordered_set<uint64_t> visited;
        double sum_path = 0.0, sum_sites = 0.0;
        for (long k = 0; k < steps; ++k) {
          for (int a2 = 0; a2 < cfg.dim; ++a2) site[a2] = integer_part(pos[a2]);
          uint64_t key = pack_site(site, cfg.dim);
          double v = tilted_site_value(law, beta, field_seed, key);
          sum_path += v;
          if (visited.insert(key).second) sum_sites += v;
          for (int a2 = 0; a2 < cfg.dim; ++a2) pos[a2] += sqrt_dt * rng.gaussian();
        }
        double x = sum_path / static_cast<double>(steps);
        if (x >= y) {
          double w = std::exp(-beta * sum_sites +
                              static_cast<double>(visited.size()) * lambda_beta);
          a[0] += w;
          a[1] += w * w;
        }
      },
      acc);
  Estimate e;
  e.n = n;
  e.mean = acc[0] / n;
  e.stderr_ = std::sqrt(std::max(acc[1] / n - e.mean * e.mean, 0.0) / n);
  e.hits = acc[0] > 0.0 ? 1 : 0;
  e.zero_hits = acc[0] == 0.0;
  if (!e.zero_hits) {
    e.logprob = std::log(e.mean);
    e.logprob_stderr = e.stderr_ / e.mean;
  }
  return e;
}

Estimate quenched_tail(const Scenery& scenery, const WalkConfig& cfg, double y,
                       long n, int threads) {
  cfg.validate();
  std::vector<double> acc;
  accumulate_chunked(n, threads, 1,
                     [&](long i, std::vector<double>& a) {
                       double x = quenched_path_average(scenery, cfg, mix64(cfg.seed, i));
                       if (x >= y) a[0] += 1.0;
                     },
                     acc);
  return frequency_estimate(static_cast<long>(acc[0]), n);
}

SpeedFit speed_fit(const FieldLaw& law, int dim, double y,
                   const std::vector<double>& t_ladder, long n, SpeedMode mode,
                   uint64_t seed, double dt, int threads) {
  if (t_ladder.empty()) throw std::invalid_argument("empty horizon ladder");
  SpeedFit fit;
  fit.mode = mode;

  Scenery frozen;
  if (mode == SpeedMode::quenched) {
    double t_max = *std::max_element(t_ladder.begin(), t_ladder.end());
    frozen = sample_scenery(law, dim, quenched_halfwidth(t_max, dim),
                            mix64(seed, 0x5C'EE));
  }

  for (std::size_t i = 0; i < t_ladder.size(); ++i) {
    WalkConfig cfg;
    cfg.dim = dim;
    cfg.t = t_ladder[i];
    cfg.dt = dt;
    cfg.seed = mix64(seed, 1000 + i);
    SpeedPoint point;
    point.t = t_ladder[i];
    point.estimate = mode == SpeedMode::annealed
                         ? annealed_tail(law, cfg, y, n, {0.0, threads})
                         : quenched_tail(frozen, cfg, y, n, threads);
    point.dropped = point.estimate.zero_hits;
    fit.points.push_back(std::move(point));
  }

  std::vector<double> xs, ys;
  for (const auto& p : fit.points) {
    if (p.dropped) continue;
    double neg_logp = -*p.estimate.logprob;
    if (mode == SpeedMode::annealed) {
      if (neg_logp <= 0.0) continue;  // sub-half frequencies only
      xs.push_back(std::log(p.t));
      ys.push_back(std::log(neg_logp));
    } else {
      double r = r_of_t(p.t, dim);
      xs.push_back(p.t / (r * r));
      ys.push_back(neg_logp);
    }
  }
  Ols ols = least_squares(xs, ys);
  if (mode == SpeedMode::annealed) fit.exponent = ols.slope;
  fit.slope = ols.slope;
  fit.r2 = ols.r2;
  return fit;
}

Estimate exit_time_check(const WalkConfig& cfg, double R, long n, int threads) {
  cfg.validate();
  if (!(R >= 1.0)) throw std::invalid_argument("R must be at least 1");
  const double radius = R * cfg.t;
  const double sqrt_dt = std::sqrt(cfg.dt);
  const long steps = cfg.steps();
  std::vector<double> acc;
  accumulate_chunked(n, threads, 1,
                     [&](long i, std::vector<double>& a) {
                       Prng rng(mix64(mix64(cfg.seed, i), kGaussTag));
                       double pos[3] = {0.0, 0.0, 0.0};
                       for (long k = 0; k < steps; ++k) {
                         for (int d = 0; d < cfg.dim; ++d) {
                           pos[d] += sqrt_dt * rng.gaussian();
                           if (std::fabs(pos[d]) >= radius) {
                             a[0] += 1.0;
                             return;
                           }
                         }
                       }
                     },
                     acc);
  return frequency_estimate(static_cast<long>(acc[0]), n);
}

FeynmanKacCheck feynman_kac_check(const Scenery& scenery, double delta,
                                  double alpha, const WalkConfig& cfg,
                                  long n, int threads) {
  cfg.validate();
  const double tau = cfg.t;
  const double side = 2.0 * cfg.R * tau;
  const int needed = static_cast<int>(std::ceil(side / 2.0)) + 1;
  if (scenery.halfwidth < needed)
    throw std::invalid_argument("scenery box too small for the walk's range");

  // h <= 1/2 so each cell reads a single unit-scale scenery cell
  int n_cells = static_cast<int>(std::ceil(2.0 * side));
  Grid grid(cfg.dim, side, n_cells);
  Profile raster = rasterize_scenery(scenery, grid, 1.0);
  Mollifier moll = Mollifier::make(grid, delta);
  Profile smooth = mollify(raster, moll);
  std::vector<double> V(smooth.values.size());
  for (std::size_t i = 0; i < V.size(); ++i) V[i] = alpha * smooth.values[i];

  const double tol = default_eigen_tol(cfg.dim);
  double lambda = principal_eigenvalue(V, grid, tol).lambda;
  double lambda0 = principal_eigenvalue(std::vector<double>(V.size(), 0.0), grid, tol).lambda;

  const double sqrt_dt = std::sqrt(cfg.dt);
  const long steps = cfg.steps();
  auto run_mc = [&](const std::vector<double>* pot, uint64_t tag,
                    double& mean, double& stderr_out) {
    std::vector<double> acc;
    accumulate_chunked(
        n, threads, 2,
        [&](long i, std::vector<double>& a) {
          Prng rng(mix64(mix64(cfg.seed, mix64(tag, i)), kGaussTag));
          double pos[3] = {0.0, 0.0, 0.0};
          double integral = 0.0;
          for (long k = 0; k < steps; ++k) {
            if (pot) {
              std::array<int, 3> cell = {0, 0, 0};
              for (int d = 0; d < cfg.dim; ++d) {
                cell[d] = static_cast<int>((pos[d] + 0.5 * side) / grid.h);
                if (cell[d] < 0 || cell[d] >= grid.n_per_side) return;  // exited
              }
              integral += (*pot)[grid.flat(cell)];
            }
            for (int d = 0; d < cfg.dim; ++d) {
              pos[d] += sqrt_dt * rng.gaussian();
              if (std::fabs(pos[d]) >= 0.5 * side) return;  // sigma <= tau
            }
          }
          double w = std::exp(cfg.dt * integral);
          a[0] += w;
          a[1] += w * w;
        },
        acc);
    mean = acc[0] / n;
    stderr_out = std::sqrt(std::max(acc[1] / n - mean * mean, 0.0) / n);
  };

  FeynmanKacCheck out;
  out.lambda = lambda;
  double mc0, se0;
  run_mc(nullptr, 0xF0, mc0, se0);
  double shape0 = (1.0 + std::pow(std::max(tau * lambda0, 0.0), cfg.dim / 2.0)) *
                  std::exp(-tau * lambda0);
  out.c_hat = mc0 / shape0;
  run_mc(&V, 0xF1, out.mc, out.mc_stderr);
  out.bound = out.c_hat *
              (1.0 + std::pow(std::max(tau * lambda, 0.0), cfg.dim / 2.0)) *
              std::exp(-tau * lambda);
  out.variance_warning = out.mc_stderr > 0.5 * std::max(out.mc, 1e-300);
  return out;
}

KsFit ks_scaling(const FieldLaw& law, int dim, const std::vector<long>& ladder_in,
                 long samples, uint64_t seed, int threads) {
  if (ladder_in.empty()) throw std::invalid_argument("empty ladder");
  std::vector<long> n_ladder = ladder_in;
  std::sort(n_ladder.begin(), n_ladder.end());
  n_ladder.erase(std::unique(n_ladder.begin(), n_ladder.end()), n_ladder.end());
  long n_max = n_ladder.back();
  const std::size_t slots = n_ladder.size();

  std::vector<double> acc;
  accumulate_chunked(
      samples, threads, slots,
      [&](long s, std::vector<double>& a) {
        uint64_t sample_seed = mix64(seed, s);
        Prng rng(mix64(sample_seed, kGaussTag));
        uint64_t field_seed = mix64(sample_seed, kFieldTag);
        std::array<int, 3> site = {0, 0, 0};
        double z = 0.0;
        std::size_t next = 0;
        for (long k = 1; k <= n_max && next < slots; ++k) {
          int move = static_cast<int>(rng.next_u64() % (2 * dim));
          int axis = move >> 1;
          site[axis] += (move & 1) ? 1 : -1;
          z += site_value(law, field_seed, pack_site(site, dim));
          while (next < slots && k == n_ladder[next]) {
            a[next] += z * z;
            ++next;
          }
        }
      },
      acc);

  KsFit fit;
  std::vector<double> xs, ys, ys_corr;
  for (std::size_t i = 0; i < slots; ++i) {
    double second = acc[i] / samples;
    fit.ns.push_back(static_cast<double>(n_ladder[i]));
    fit.second_moment.push_back(second);
    xs.push_back(std::log(static_cast<double>(n_ladder[i])));
    ys.push_back(std::log(second));
    ys_corr.push_back(std::log(second / std::log(static_cast<double>(n_ladder[i]))));
  }
  Ols plain = least_squares(xs, ys);
  Ols corr = least_squares(xs, ys_corr);
  fit.exponent = plain.slope;
  fit.r2 = plain.r2;
  fit.exponent_logcorr = corr.slope;
  fit.r2_logcorr = corr.r2;
  return fit;
}

}  // namespace lds
