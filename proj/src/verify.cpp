#include "lds/verify.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "lds/field.hpp"
#include "lds/grid.hpp"
#include "lds/montecarlo.hpp"
#include "lds/ratefn.hpp"
#include "lds/rng.hpp"
#include "lds/spectral.hpp"

namespace lds {

namespace {

constexpr double kPi = std::numbers::pi;

struct Reporter {
  std::vector<CheckResult>& out;
  std::string group;
  const std::string& filter;

  bool active() const {
    return filter.empty() || group.find(filter) != std::string::npos;
  }
  void add(const std::string& name, bool pass, const std::string& detail) {
    out.push_back({group, name, pass, detail});
  }
  void add(const std::string& name, bool pass, double got, double gate) {
    std::ostringstream s;
    s.precision(6);
    s << "got " << got << ", gate " << gate;
    add(name, pass, s.str());
  }
};

Density verify_density(const Grid& g, uint64_t seed, double delta) {
  Prng rng(mix64(seed, 0xDE1));
  std::vector<double> v(g.cells(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    auto c = g.unflat(i);
    double w = std::cos(kPi * g.center(c[0]) / g.A);
    v[i] = w * w * (0.3 + rng.uniform());
  }
  Density rough = Density::normalized(g, std::move(v));
  return mollify_density(rough, Mollifier::make(g, delta));
}

void check_field(Reporter r, const VerifyOptions& opts) {
  if (!r.active()) return;
  (void)opts;
  auto laws = {FieldLaw::rademacher(), FieldLaw::uniform_symmetric()};
  bool super = true, bounded = true, round_trip = true;
  double worst_rt = 0.0;
  for (const auto& law : laws) {
    for (double x = 0.0; x <= 4.0; x += 0.5)
      for (double y = 0.0; y <= 4.0; y += 0.5)
        if (log_mgf(law, x) + log_mgf(law, y) > log_mgf(law, x + y) + 1e-12)
          super = false;
    for (double a = -6.0; a <= 6.0; a += 0.25)
      if (log_mgf(law, a) > std::max(std::fabs(law.m), law.M) * std::fabs(a) + 1e-12)
        bounded = false;
    for (double alpha : {-2.0, -0.5, 1.0, 3.0}) {
      double best = -1e300;
      for (int i = 1; i < 2000; ++i) {
        double y = law.m + (law.M - law.m) * i / 2000.0;
        best = std::max(best, alpha * y - cramer(law, y).value);
      }
      worst_rt = std::max(worst_rt, std::fabs(best - log_mgf(law, alpha)));
      if (std::fabs(best - log_mgf(law, alpha)) > 1e-4) round_trip = false;
    }
  }
  r.add("log-mgf superadditive on R+", super, super ? "all grid pairs" : "violated");
  r.add("log-mgf linear growth bound", bounded, bounded ? "all grid points" : "violated");
  r.add("Legendre round trip", round_trip, worst_rt, 1e-4);
}

void check_eigen(Reporter r, const VerifyOptions& opts) {
  if (!r.active()) return;
  double tol1 = opts.tol("eigen_d1", 0.005);
  Grid g1(1, 1.0, 256);
  double l1 = principal_eigenvalue(std::vector<double>(g1.cells(), 0.0), g1, 1e-10).lambda;
  double target1 = kPi * kPi / 2.0;
  r.add("free eigenvalue d=1", std::fabs(l1 - target1) / target1 < tol1,
        std::fabs(l1 - target1) / target1, tol1);

  double tol2 = opts.tol("eigen_d2", 0.01);
  Grid g2(2, 1.0, 96);
  double l2 = principal_eigenvalue(std::vector<double>(g2.cells(), 0.0), g2, 1e-7).lambda;
  double target2 = kPi * kPi;
  r.add("free eigenvalue d=2", std::fabs(l2 - target2) / target2 < tol2,
        std::fabs(l2 - target2) / target2, tol2);

  std::vector<double> vc(g1.cells(), 0.7);
  double shifted = principal_eigenvalue(vc, g1, 1e-10).lambda;
  r.add("constant shift exact", std::fabs(shifted - (l1 - 0.7)) < 1e-7,
        std::fabs(shifted - (l1 - 0.7)), 1e-7);
}

void check_duality(Reporter r, const VerifyOptions& opts) {
  if (!r.active()) return;
  double gate = opts.tol("duality_gap", 1e-3);
  Grid g(1, 1.0, 64);
  double worst = -1e300;
  bool ok = true;
  int count = 0;
  for (const auto& law : {FieldLaw::rademacher(), FieldLaw::uniform_symmetric()}) {
    for (uint64_t s = 1; s <= 5; ++s) {
      Prng rng(mix64(opts.seed, mix64(s, 0xD0)));
      Density f = verify_density(g, mix64(opts.seed, s), 0.05 + 0.1 * rng.uniform());
      double y = 0.05 + 0.7 * rng.uniform();
      auto d = duality_check(y, f, law);
      if (!d.primal.finite || !d.dual.finite || d.gap < -1e-6 || d.gap > gate)
        ok = false;
      worst = std::max(worst, d.gap);
      ++count;
    }
  }
  std::ostringstream detail;
  detail.precision(6);
  detail << count << " instances, worst gap " << worst << ", gate " << gate;
  r.add("transform duality gap", ok, detail.str());
}

void check_mollifier(Reporter r, const VerifyOptions& opts) {
  if (!r.active()) return;
  double slack_h = opts.tol("mollifier_slack_h", 10.0);
  Grid g(1, 1.0, 128);
  bool ok = true;
  double worst = -1e300;
  for (uint64_t s = 0; s < 40; ++s) {
    Prng rng(mix64(opts.seed, mix64(s, 0xAB)));
    double delta = g.h * (4.0 + 20.0 * rng.uniform());
    double eps1 = 0.02 + 0.3 * rng.uniform();
    Mollifier m = Mollifier::make(g, delta);
    Density mu = verify_density(g, mix64(opts.seed, s + 1000), 0.05);
    std::vector<double> uv(g.cells());
    for (double& x : uv) x = 2.0 * rng.uniform() - 1.0;
    auto d = mollifier_defect(mu, Profile(g, uv), m, eps1);
    worst = std::max(worst, d.lhs - d.rhs);
    if (d.lhs > d.rhs + slack_h * g.h) ok = false;
  }
  std::ostringstream detail;
  detail.precision(6);
  detail << "worst lhs-rhs " << worst << ", slack " << slack_h * g.h;
  r.add("smoothing defect bound", ok, detail.str());
}

void check_scaling(Reporter r, const VerifyOptions& opts) {
  if (!r.active()) return;
  Grid g1(1, 1.0, 64);
  Density mu = verify_density(g1, mix64(opts.seed, 0x5A), 0.05);
  Prng rng(mix64(opts.seed, 0x5B));
  std::vector<double> uv(g1.cells());
  for (double& x : uv) x = 2.0 * rng.uniform() - 1.0;
  Profile u(g1, uv);
  auto law = FieldLaw::rademacher();

  bool ok = true;
  double worst = 0.0;
  for (double A : {2.0, 4.0, 8.0}) {
    Grid gA(1, A, 64);
    std::vector<double> muA(mu.values.size());
    for (std::size_t i = 0; i < muA.size(); ++i) muA[i] = mu.values[i] / A;
    Density muA_d = Density::from_raw(gA, std::move(muA));
    Profile uA(gA, u.values);
    double d_pair = std::fabs(pairing(muA_d, uA) - pairing(mu, u));
    double d_rate = std::fabs(dirichlet_rate(muA_d) - dirichlet_rate(mu) / (A * A)) /
                    (1.0 + dirichlet_rate(mu));
    double d_ent = std::fabs(entropy_I(uA, law).value - A * entropy_I(u, law).value) /
                   (1.0 + entropy_I(u, law).value);
    worst = std::max({worst, d_pair, d_rate, d_ent});
    if (d_pair > 1e-12 || d_rate > 1e-10 || d_ent > 1e-10) ok = false;
  }
  r.add("dilation identities", ok, worst, 1e-10);

  double d = 1.0;
  double c_d = std::pow(2.0 / d, d / (d + 2.0)) * (1.0 + d / 2.0);
  double I = 0.37, L = 2.43;
  double A_star = std::pow(2.0 * L / (d * I), 1.0 / (d + 2.0));
  double direct = I * A_star + L / (A_star * A_star);
  double product = c_d * std::pow(I, 2.0 / 3.0) * std::pow(L, 1.0 / 3.0);
  r.add("product-form constant", std::fabs(direct - product) < 1e-10,
        std::fabs(direct - product), 1e-10);
}

void check_localization(Reporter r, const VerifyOptions& opts) {
  if (!r.active()) return;
  auto law = FieldLaw::rademacher();
  Grid g(1, 4.0, 256);
  bool ok = true;
  double worst = -1e300;
  for (uint64_t s = 1; s <= 10; ++s) {
    Scenery sc = sample_scenery(law, 1, 10, mix64(opts.seed, s));
    Profile raster = rasterize_scenery(sc, g, 4.0);
    Profile smooth = mollify(raster, Mollifier::make(g, 0.25));
    std::vector<double> V(smooth.values.size());
    for (std::size_t i = 0; i < V.size(); ++i) V[i] = 1.5 * smooth.values[i];
    auto gap = localization_gap(V, g, 1.0, 1e-9);
    worst = std::max(worst, gap.lambda_big - gap.min_sub);
    if (gap.lambda_big > gap.min_sub + 1e-10) ok = false;
  }
  std::ostringstream detail;
  detail.precision(6);
  detail << "worst big-minus-sub " << worst << " (must be <= 0)";
  r.add("sub-box eigenvalue direction", ok, detail.str());
}

void check_montecarlo(Reporter r, const VerifyOptions& opts) {
  if (!r.active()) return;
  auto law = FieldLaw::rademacher();
  WalkConfig cfg;
  cfg.dim = 1;
  cfg.t = 10.0;
  cfg.dt = 1.0 / 64.0;
  cfg.seed = opts.seed;
  Scenery sc = sample_scenery(law, 1, 64, mix64(opts.seed, 3));
  bool bounded = true;
  for (int i = 0; i < 50; ++i) {
    WalkConfig c = cfg;
    c.seed = mix64(opts.seed, 100 + i);
    if (std::fabs(occupation_functional(sc, c)) > 1.0) bounded = false;
  }
  r.add("occupation average bounded by 1", bounded,
        bounded ? "50 paths" : "violated");

  Estimate a = annealed_tail(law, cfg, 0.1, 4000, {0.0, 2});
  Estimate b = annealed_tail(law, cfg, 0.1, 4000, {0.0, 1});
  r.add("sampler determinism across thread counts", a.mean == b.mean && a.hits == b.hits,
        a.mean == b.mean ? "bit-identical" : "mismatch");
}

}  // namespace

std::vector<CheckResult> run_verification(const VerifyOptions& opts) {
  std::vector<CheckResult> out;
  check_field({out, "field", opts.filter}, opts);
  check_eigen({out, "eigen", opts.filter}, opts);
  check_duality({out, "duality", opts.filter}, opts);
  check_mollifier({out, "mollifier", opts.filter}, opts);
  check_scaling({out, "scaling", opts.filter}, opts);
  check_localization({out, "localization", opts.filter}, opts);
  check_montecarlo({out, "montecarlo", opts.filter}, opts);
  return out;
}

}  // namespace lds
