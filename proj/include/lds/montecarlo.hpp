#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lds/field.hpp"
#include "lds/grid.hpp"

namespace lds {

struct WalkConfig {
  int dim = 1;
  double t = 100.0;    // horizon
  double dt = 1.0 / 64.0;
  double R = 2.0;      // confinement radius multiplier for diagnostics
  uint64_t seed = 1;

  void validate() const;
  long steps() const;
};

struct Estimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  long n = 0;
  std::optional<double> logprob;
  double logprob_stderr = 0.0;  // Wilson-interval width at one sigma
  long hits = 0;
  bool zero_hits = false;       // frequency 0: only an upper bound is known
};

// Time average (1/t) int xi(B_s) ds along one Euler path with sqrt(dt)
// Gaussian increments; the scenery is read at the integer-part cell of the
// current position. Throws std::out_of_range with the exit time in the
// message if the path leaves the sampled box.
double occupation_functional(const Scenery& scenery, const WalkConfig& cfg);

struct TailOptions {
  double tilt_beta = 0.0;  // exponential tilt of the scenery law; 0 = plain
  int threads = 1;
};

// P[<L_t, xi> >= y] under the annealed measure: a fresh scenery per path,
// drawn lazily site-by-site from the counter generator. With tilt_beta
// set, sceneries are sampled under the tilted law inside the walk's range
// and reweighted by the exact likelihood ratio from the log-MGF.
Estimate annealed_tail(const FieldLaw& law, const WalkConfig& cfg, double y,
                       long n, const TailOptions& opts = {});

// Same event on one frozen scenery.
Estimate quenched_tail(const Scenery& scenery, const WalkConfig& cfg, double y,
                       long n, int threads = 1);

enum class SpeedMode { annealed, quenched };

struct SpeedPoint {
  double t = 0.0;
  Estimate estimate;
  bool dropped = false;  // zero hits
};

struct SpeedFit {
  std::vector<SpeedPoint> points;
  double exponent = 0.0;  // annealed: slope of log(-log P) vs log t
  double slope = 0.0;     // quenched: slope of -log P vs t/r^2(t)
  double r2 = 0.0;
  SpeedMode mode = SpeedMode::annealed;
};

// Tail probabilities down a horizon ladder and the speed-rate regression.
// Quenched mode reuses one scenery wide enough for the largest horizon.
SpeedFit speed_fit(const FieldLaw& law, int dim, double y,
                   const std::vector<double>& t_ladder, long n, SpeedMode mode,
                   uint64_t seed, double dt = 1.0 / 64.0, int threads = 1);

// Frequency of leaving the cube of radius R*tau before tau.
Estimate exit_time_check(const WalkConfig& cfg, double R, long n, int threads = 1);

struct FeynmanKacCheck {
  double mc = 0.0;        // E[ exp(int V(B_s) ds) ; sigma > tau ]
  double mc_stderr = 0.0;
  double bound = 0.0;     // c_hat (1 + (tau lambda)_+^{d/2}) exp(-tau lambda)
  double lambda = 0.0;    // principal eigenvalue of the rasterized potential
  double c_hat = 0.0;     // prefactor fitted once at V = 0 on the same box
  bool variance_warning = false;
};

// Feynman-Kac upper bound check for V = alpha psi_delta * xi at the
// scenery's native unit scale, rasterized on the walk's confinement box.
FeynmanKacCheck feynman_kac_check(const Scenery& scenery, double delta,
                                  double alpha, const WalkConfig& cfg,
                                  long n, int threads = 1);

struct KsFit {
  std::vector<double> ns;
  std::vector<double> second_moment;
  double exponent = 0.0;       // slope of log E[Z_n^2] vs log n
  double r2 = 0.0;
  double exponent_logcorr = 0.0;  // same fit on E[Z_n^2] / log n
  double r2_logcorr = 0.0;
};

// Variance growth of Z_n = sum_{k<=n} xi(S_k) for the simple symmetric
// lattice walk, fresh scenery per sample.
KsFit ks_scaling(const FieldLaw& law, int dim, const std::vector<long>& n_ladder,
                 long samples, uint64_t seed, int threads = 1);

}  // namespace lds
