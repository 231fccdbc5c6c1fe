#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "lds/montecarlo.hpp"
#include "lds/rng.hpp"

using namespace lds;

namespace {

// two-sample Kolmogorov-Smirnov distance
double ks_distance(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j]) ++i; else ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / a.size() -
                              static_cast<double>(j) / b.size()));
  }
  return d;
}

double annealed_sample(const FieldLaw& law, const WalkConfig& cfg, long i) {
  // one path functional through the public scenery-free estimator:
  // re-run annealed_tail with one path and read the mean of the indicator
  // is wasteful, so walk directly against a sampled box instead
  Scenery sc = sample_scenery(law, cfg.dim, 64, mix64(cfg.seed, 7777 + i));
  WalkConfig one = cfg;
  one.seed = mix64(cfg.seed, i);
  return occupation_functional(sc, one);
}

}  // namespace

TEST_CASE("walk config validation") {
  WalkConfig cfg;
  cfg.dim = 1;
  cfg.t = 1.0;
  cfg.dt = 0.5;  // dt > t/100
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.dt = 1.0 / 128.0;
  CHECK_NOTHROW(cfg.validate());
  cfg.dim = 5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("occupation functional: frozen constant scenery") {
  Scenery sc;
  sc.law = FieldLaw::uniform_symmetric();
  sc.dim = 1;
  sc.halfwidth = 64;
  sc.seed = 0;
  sc.values.assign(129, 0.37);
  WalkConfig cfg;
  cfg.dim = 1;
  cfg.t = 10.0;
  cfg.dt = 1.0 / 64.0;
  cfg.seed = 3;
  CHECK(occupation_functional(sc, cfg) == doctest::Approx(0.37).epsilon(1e-14));
}

TEST_CASE("occupation functional: short horizons read the origin cell") {
  auto law = FieldLaw::rademacher();
  Scenery sc = sample_scenery(law, 1, 8, 41);
  WalkConfig cfg;
  cfg.dim = 1;
  cfg.t = 0.01;
  cfg.dt = 1e-4;
  cfg.seed = 5;
  CHECK(occupation_functional(sc, cfg) == sc.at({0, 0, 0}));
}

TEST_CASE("occupation functional: range guard and determinism") {
  auto law = FieldLaw::rademacher();
  Scenery tiny = sample_scenery(law, 1, 1, 9);
  WalkConfig cfg;
  cfg.dim = 1;
  cfg.t = 50.0;
  cfg.dt = 1.0 / 64.0;
  cfg.seed = 11;
  CHECK_THROWS_AS(occupation_functional(tiny, cfg), std::out_of_range);

  Scenery big = sample_scenery(law, 1, 128, 9);
  double x1 = occupation_functional(big, cfg);
  double x2 = occupation_functional(big, cfg);
  CHECK(x1 == x2);
  CHECK(std::fabs(x1) <= 1.0);
}

TEST_CASE("annealed batch is centered and bounded") {
  auto law = FieldLaw::rademacher();
  WalkConfig cfg;
  cfg.dim = 1;
  cfg.t = 25.0;
  cfg.dt = 1.0 / 64.0;
  cfg.seed = 21;
  long n = 400;
  double sum = 0.0;
  for (long i = 0; i < n; ++i) {
    double x = annealed_sample(law, cfg, i);
    CHECK(std::fabs(x) <= 1.0);
    sum += x;
  }
  double mean = sum / n;
  // Var X ~ t^{-1/2}; a generous five-sigma band
  CHECK(std::fabs(mean) <= 5.0 * std::pow(cfg.t, -0.25) / std::sqrt(double(n)));
}

TEST_CASE("annealed tail: half mass at zero, impossible targets, nesting") {
  auto law = FieldLaw::rademacher();
  WalkConfig cfg;
  cfg.dim = 1;
  cfg.t = 25.0;
  cfg.dt = 1.0 / 64.0;
  cfg.seed = 31;
  long n = 20000;
  Estimate at0 = annealed_tail(law, cfg, 0.0, n, {0.0, 2});
  REQUIRE(at0.logprob.has_value());
  CHECK(std::fabs(at0.mean - 0.5) <= 3.0 * at0.stderr_ + 1e-3);

  Estimate impossible = annealed_tail(law, cfg, 1.5, 2000, {0.0, 2});
  CHECK(impossible.zero_hits);
  CHECK(impossible.hits == 0);

  Estimate at02 = annealed_tail(law, cfg, 0.2, n, {0.0, 2});
  Estimate at04 = annealed_tail(law, cfg, 0.4, n, {0.0, 2});
  CHECK(at02.mean >= at04.mean);  // nested events on identical paths
}

TEST_CASE("annealed tail: determinism across reruns and thread counts") {
  auto law = FieldLaw::uniform_symmetric();
  WalkConfig cfg;
  cfg.dim = 1;
  cfg.t = 10.0;
  cfg.dt = 1.0 / 64.0;
  cfg.seed = 77;
  Estimate a = annealed_tail(law, cfg, 0.1, 6000, {0.0, 1});
  Estimate b = annealed_tail(law, cfg, 0.1, 6000, {0.0, 2});
  CHECK(a.mean == b.mean);
  CHECK(a.hits == b.hits);
  CHECK(*a.logprob == *b.logprob);
}

TEST_CASE("annealed tail: exponential tilt agrees with plain frequency") {
  auto law = FieldLaw::rademacher();
  WalkConfig cfg;
  cfg.dim = 1;
  cfg.t = 8.0;
  cfg.dt = 1.0 / 64.0;
  cfg.seed = 13;
  double y = 0.45;
  Estimate plain = annealed_tail(law, cfg, y, 40000, {0.0, 2});
  Estimate tilted = annealed_tail(law, cfg, y, 8000, {0.8, 2});
  REQUIRE(plain.logprob.has_value());
  REQUIRE(tilted.logprob.has_value());
  double spread = 3.0 * (plain.stderr_ + tilted.stderr_);
  CHECK(std::fabs(plain.mean - tilted.mean) <= spread + 0.01 * plain.mean);
}

TEST_CASE("annealed tail: the tilt reaches tails invisible to plain counting") {
  auto law = FieldLaw::rademacher();
  WalkConfig cfg;
  cfg.dim = 1;
  cfg.t = 200.0;
  cfg.dt = 1.0 / 64.0;
  cfg.seed = 29;
  double y = 0.95;
  Estimate plain = annealed_tail(law, cfg, y, 2000, {0.0, 2});
  CHECK(plain.zero_hits);
  // tilt matched to the target: Lambda'(beta) = y
  double beta = std::atanh(y);
  Estimate tilted = annealed_tail(law, cfg, y, 2000, {beta, 2});
  CHECK(!tilted.zero_hits);
  CHECK(tilted.mean > 0.0);
  REQUIRE(tilted.logprob.has_value());
  CHECK(*tilted.logprob < std::log(1.0 / 2000.0));  // below plain resolution
}

TEST_CASE("empirical law of the functional is symmetric (KS self-test)") {
  auto law = FieldLaw::rademacher();
  WalkConfig cfg;
  cfg.dim = 1;
  cfg.t = 25.0;
  cfg.dt = 1.0 / 64.0;
  cfg.seed = 47;
  long n = 1500;
  std::vector<double> sample(n), negated(n);
  for (long i = 0; i < n; ++i) {
    sample[i] = annealed_sample(law, cfg, i);
    negated[i] = -sample[i];
  }
  double d = ks_distance(sample, negated);
  double critical = 1.628 * std::sqrt(2.0 / n);  // 1% level
  CHECK(d <= critical);
}

TEST_CASE("averaged quenched tails reproduce the annealed frequency") {
  auto law = FieldLaw::rademacher();
  WalkConfig cfg;
  cfg.dim = 1;
  cfg.t = 25.0;
  cfg.dt = 1.0 / 64.0;
  double y = 0.2;
  long per_scenery = 2000;
  int sceneries = 50;
  std::vector<double> means;
  for (int s = 0; s < sceneries; ++s) {
    Scenery sc = sample_scenery(law, 1, 64, mix64(900, s));
    WalkConfig c = cfg;
    c.seed = mix64(1000, s);
    means.push_back(quenched_tail(sc, c, y, per_scenery, 2).mean);
  }
  double quenched_avg = 0.0;
  for (double m : means) quenched_avg += m;
  quenched_avg /= sceneries;
  // the scenery-to-scenery spread dominates the uncertainty of the average
  double var = 0.0;
  for (double m : means) var += (m - quenched_avg) * (m - quenched_avg);
  double sigma_avg = std::sqrt(var / (sceneries - 1) / sceneries);
  cfg.seed = 5000;
  Estimate annealed = annealed_tail(law, cfg, y, 100000, {0.0, 2});
  CHECK(std::fabs(quenched_avg - annealed.mean) <=
        3.0 * (sigma_avg + annealed.stderr_));
}

TEST_CASE("quenched tails dominate annealed ones on average") {
  auto law = FieldLaw::rademacher();
  double y = 0.3;
  WalkConfig cfg;
  cfg.dim = 1;
  cfg.t = 50.0;
  cfg.dt = 1.0 / 64.0;
  cfg.seed = 61;
  Estimate annealed = annealed_tail(law, cfg, y, 40000, {0.0, 2});
  REQUIRE(annealed.logprob.has_value());
  double mean_neg_logp = 0.0;
  int kept = 0;
  for (int s = 0; s < 5; ++s) {
    Scenery sc = sample_scenery(law, 1, 96, mix64(70, s));
    WalkConfig c = cfg;
    c.seed = mix64(71, s);
    Estimate q = quenched_tail(sc, c, y, 40000, 2);
    if (q.logprob) {
      mean_neg_logp += -*q.logprob;
      ++kept;
    }
  }
  REQUIRE(kept >= 4);
  mean_neg_logp /= kept;
  CHECK(mean_neg_logp >= -*annealed.logprob - 0.5);
}

TEST_CASE("speed fit runs and reports decaying tails") {
  auto law = FieldLaw::rademacher();
  std::vector<double> ladder = {10.0, 20.0, 40.0};
  SpeedFit ann = speed_fit(law, 1, 0.3, ladder, 20000, SpeedMode::annealed, 17);
  REQUIRE(ann.points.size() == 3);
  for (const auto& p : ann.points) CHECK(!p.dropped);
  CHECK(ann.exponent > 0.0);
  CHECK(ann.points[0].estimate.mean > ann.points[2].estimate.mean);

  SpeedFit quen = speed_fit(law, 1, 0.3, ladder, 20000, SpeedMode::quenched, 18);
  CHECK(quen.slope > 0.0);
}

TEST_CASE("exit frequencies obey the Gaussian bound") {
  WalkConfig cfg;
  cfg.dim = 1;
  cfg.t = 1.0;
  cfg.dt = 1.0 / 128.0;
  cfg.seed = 23;
  long n = 100000;
  Estimate e1 = exit_time_check(cfg, 1.0, n, 2);
  Estimate e15 = exit_time_check(cfg, 1.5, n, 2);
  Estimate e2 = exit_time_check(cfg, 2.0, n, 2);
  REQUIRE(e1.logprob.has_value());
  // fit C at the smallest radius, bound the rest
  double log_c = *e1.logprob + 0.5 * 1.0 * cfg.t;
  CHECK(*e15.logprob <= log_c - 0.5 * 1.5 * 1.5 * cfg.t + 2.0 * e15.logprob_stderr);
  CHECK(*e2.logprob <= log_c - 0.5 * 2.0 * 2.0 * cfg.t + 2.0 * e2.logprob_stderr);

  // doubling the horizon at fixed R at least doubles -log P
  WalkConfig cfg2 = cfg;
  cfg2.t = 2.0;
  Estimate d1 = exit_time_check(cfg, 1.5, n, 2);
  Estimate d2 = exit_time_check(cfg2, 1.5, n, 2);
  REQUIRE(d2.logprob.has_value());
  CHECK(-*d2.logprob >= 2.0 * (-*d1.logprob) - 3.0 * (d1.logprob_stderr + d2.logprob_stderr));

  // large radius: no exits at all
  Estimate far = exit_time_check(cfg, 8.0, 20000, 2);
  CHECK(far.zero_hits);
}

TEST_CASE("feynman-kac bound holds and matches the exit complement at zero") {
  auto law = FieldLaw::rademacher();
  WalkConfig cfg;
  cfg.dim = 1;
  cfg.t = 2.0;
  cfg.dt = 1.0 / 64.0;
  cfg.R = 2.0;
  cfg.seed = 19;
  Scenery sc = sample_scenery(law, 1, 16, 5);
  long n = 40000;

  FeynmanKacCheck zero = feynman_kac_check(sc, 1.0, 0.0, cfg, n, 2);
  CHECK(zero.mc == doctest::Approx(zero.bound).epsilon(0.05));
  CHECK(!zero.variance_warning);

  FeynmanKacCheck fk = feynman_kac_check(sc, 1.0, 0.5, cfg, n, 2);
  CHECK(fk.mc <= fk.bound * 1.1 + 3.0 * fk.mc_stderr);
  CHECK(fk.lambda < zero.lambda);  // wells lower the ground energy typically

  // matched paths on a field that is +1 across the whole confinement box:
  // every surviving path accumulates exactly alpha*tau
  WalkConfig one = cfg;
  one.t = 1.0;
  one.dt = 1.0 / 128.0;
  one.R = 2.0;  // box [-2, 2], sites -3..2 in play
  uint64_t seed = 0;
  Scenery tilted;
  for (uint64_t s = 1; s < 4000 && seed == 0; ++s) {
    tilted = sample_scenery(law, 1, 16, s);
    bool all_plus = true;
    for (int j = -3; j <= 3; ++j)
      if (tilted.at({j, 0, 0}) < 0.0) all_plus = false;
    if (all_plus) seed = s;
  }
  REQUIRE(seed != 0);
  FeynmanKacCheck plus = feynman_kac_check(tilted, 1.0, 0.6, one, n, 2);
  FeynmanKacCheck minus = feynman_kac_check(tilted, 1.0, -0.6, one, n, 2);
  CHECK(plus.mc >= minus.mc);
  CHECK(plus.mc == doctest::Approx(minus.mc * std::exp(2.0 * 0.6 * one.t)).epsilon(0.02));
}

TEST_CASE("halving the time step leaves tail estimates consistent") {
  auto law = FieldLaw::rademacher();
  WalkConfig coarse;
  coarse.dim = 1;
  coarse.t = 25.0;
  coarse.dt = 1.0 / 64.0;
  coarse.seed = 83;
  WalkConfig fine = coarse;
  fine.dt = 1.0 / 128.0;
  long n = 20000;
  Estimate a = annealed_tail(law, coarse, 0.3, n, {0.0, 2});
  Estimate b = annealed_tail(law, fine, 0.3, n, {0.0, 2});
  double spread = 3.0 * (a.stderr_ + b.stderr_);
  // O(sqrt(dt)) cell-crossing bias allowance on top of the noise band
  CHECK(std::fabs(a.mean - b.mean) <= spread + 2.0 * std::sqrt(coarse.dt) * a.mean);
}

TEST_CASE("lattice walk variance growth exponents") {
  auto law = FieldLaw::rademacher();
  std::vector<long> ladder = {256, 512, 1024, 2048, 4096};
  KsFit d1 = ks_scaling(law, 1, ladder, 3000, 7, 2);
  CHECK(d1.exponent >= 1.40);
  CHECK(d1.exponent <= 1.60);

  KsFit d3 = ks_scaling(law, 3, ladder, 3000, 8, 2);
  CHECK(d3.exponent >= 0.90);
  CHECK(d3.exponent <= 1.10);

  KsFit d2 = ks_scaling(law, 2, ladder, 3000, 9, 2);
  CHECK(d2.exponent >= 1.00);
  CHECK(d2.exponent <= 1.25);
  CHECK(d2.r2_logcorr >= d2.r2 - 1e-4);  // the log correction straightens the fit
}
