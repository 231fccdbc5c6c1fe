#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "lds/io.hpp"
#include "lds/montecarlo.hpp"
#include "lds/parallel.hpp"
#include "lds/ratefn.hpp"
#include "lds/spectral.hpp"
#include "lds/svg.hpp"
#include "lds/verify.hpp"

using nlohmann::json;
using namespace lds;

namespace {

// exit codes: 0 ok, 1 property failure, 2 config error, 3 non-convergence
constexpr int kOk = 0, kPropertyFailure = 1, kConfigError = 2, kNumericalError = 3;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Accepts a file path or an inline JSON object.
json load_config(const std::string& path_or_json) {
  try {
    if (!path_or_json.empty() && path_or_json.front() == '{')
      return json::parse(path_or_json);
    std::ifstream in(path_or_json);
    if (!in) throw ConfigError("cannot open config file: " + path_or_json);
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

// Unknown keys are rejected; defaults are materialized into the result so
// the echoed config is complete.
json materialize(const json& user, const json& defaults,
                 const std::vector<std::string>& required) {
  if (!user.is_object()) throw ConfigError("config must be a JSON object");
  for (auto& [key, value] : user.items()) {
    (void)value;
    if (!defaults.contains(key))
      throw ConfigError("unknown config key: " + key);
  }
  json eff = defaults;
  for (auto& [key, value] : user.items()) eff[key] = value;
  for (const auto& key : required)
    if (eff[key].is_null())
      throw ConfigError("missing required config key: " + key);
  return eff;
}

void check_keys(const json& obj, const std::vector<std::string>& allowed,
                const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (auto& [key, value] : obj.items()) {
    (void)value;
    bool ok = false;
    for (const auto& a : allowed) ok = ok || a == key;
    if (!ok) throw ConfigError("unknown key in " + where + ": " + key);
  }
}

std::vector<double> parse_axis_grid(const json& j, const std::string& where) {
  check_keys(j, {"min", "max", "count", "values"}, where);
  if (j.contains("values")) return j.at("values").get<std::vector<double>>();
  double lo = j.at("min").get<double>();
  double hi = j.at("max").get<double>();
  int count = j.at("count").get<int>();
  if (count < 2 || !(hi > lo)) throw ConfigError("bad grid bounds in " + where);
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i)
    out[i] = lo + (hi - lo) * i / (count - 1);
  return out;
}

std::string svg_with_config(const std::string& svg, const json& eff) {
  return "<!-- " + tool_version() + " config: " + eff.dump() + " -->\n" + svg;
}

int resolve_threads(const json& eff, int cli_cap) {
  int t = eff.at("threads").get<int>();
  if (t <= 0) t = default_threads();
  if (cli_cap > 0) t = std::min(t, cli_cap);
  return t;
}

void echo_config(const std::string& output, const json& eff) {
  write_text_file(output + ".config.json", eff.dump(2) + "\n");
}

RateSettings build_settings(const json& eff) {
  RateSettings s = settings_from_json(eff.at("settings"), eff.at("dim").get<int>());
  check_keys(eff.at("grid"), {"A", "N"}, "grid");
  s.A = eff.at("grid").at("A").get<double>();
  s.N = eff.at("grid").at("N").get<int>();
  s.seed = eff.at("seed").get<uint64_t>();
  return s;
}

int cmd_ratefn(const json& user, bool dry_run, int cli_threads) {
  json defaults = {
      {"command", "ratefn"},
      {"curve", nullptr},
      {"law", json{{"kind", "rademacher"}}},
      {"dim", 1},
      {"grid", json{{"A", 4.0}, {"N", 128}}},
      {"y_grid", json{{"min", -0.9}, {"max", 0.9}, {"count", 21}}},
      {"alpha_grid", json{{"min", -8.0}, {"max", 8.0}, {"count", 17}}},
      {"settings", settings_to_json(RateSettings{})},
      {"seed", 1},
      {"threads", 0},
      {"output", nullptr},
  };
  json eff = materialize(user, defaults, {"curve", "output"});
  FieldLaw law = law_from_json(eff.at("law"));
  RateSettings settings = build_settings(eff);
  std::string curve_kind = eff.at("curve").get<std::string>();
  std::string output = eff.at("output").get<std::string>();
  int threads = resolve_threads(eff, cli_threads);
  if (dry_run) {
    std::cout << eff.dump(2) << "\n";
    return kOk;
  }

  std::vector<double> xs = curve_kind == "quenched_l"
                               ? parse_axis_grid(eff.at("alpha_grid"), "alpha_grid")
                               : parse_axis_grid(eff.at("y_grid"), "y_grid");
  RateCurve curve = build_rate_curve(curve_kind, xs, law, settings, threads);

  write_curve_csv(output + ".csv", curve, eff);
  json summary;
  summary["version"] = tool_version();
  summary["config"] = eff;
  json points = json::array();
  for (const auto& p : curve.points) {
    json row;
    row["x"] = p.x;
    if (p.value.finite) row["value"] = p.value.value; else row["value"] = "inf";
    row["feasibility"] = p.feasibility;
    points.push_back(row);
  }
  summary["points"] = points;
  write_text_file(output + ".json", summary.dump(2) + "\n");

  if (settings.dim == 1) {
    std::vector<double> px, py;
    for (const auto& p : curve.points) {
      px.push_back(p.x);
      py.push_back(p.value.finite ? p.value.value
                                  : std::numeric_limits<double>::quiet_NaN());
    }
    write_text_file(
        output + ".svg",
        svg_with_config(svg_line_plot(px, py, curve_kind,
                                      curve_kind == "quenched_l" ? "alpha" : "y",
                                      "rate"),
                        eff));
  }
  echo_config(output, eff);
  return kOk;
}

Scenery scenery_from_config(const json& sc, const FieldLaw& law, int dim) {
  check_keys(sc, {"file", "seed", "halfwidth"}, "scenery");
  if (sc.contains("file")) return read_scenery(sc.at("file").get<std::string>());
  return sample_scenery(law, dim, sc.at("halfwidth").get<int>(),
                        sc.at("seed").get<uint64_t>());
}

int cmd_simulate(const json& user, bool dry_run, int cli_threads) {
  json defaults = {
      {"command", "simulate"},
      {"experiment", nullptr},
      {"law", json{{"kind", "rademacher"}}},
      {"dim", 1},
      {"t", 100.0},
      {"dt", 1.0 / 64.0},
      {"R", 2.0},
      {"y", 0.3},
      {"n", 100000},
      {"mode", "annealed"},
      {"t_ladder", json::array({25.0, 50.0, 100.0, 200.0, 400.0})},
      {"n_ladder", json::array({256, 1024, 4096, 16384})},
      {"samples", 10000},
      {"tilt_beta", 0.0},
      {"alpha", 0.5},
      {"delta", 1.0},
      {"radii", json::array({1.0, 1.5, 2.0})},
      {"scenery", json{{"seed", 1}, {"halfwidth", 64}}},
      {"seed", 1},
      {"threads", 0},
      {"output", nullptr},
  };
  json eff = materialize(user, defaults, {"experiment", "output"});
  FieldLaw law = law_from_json(eff.at("law"));
  std::string experiment = eff.at("experiment").get<std::string>();
  std::string output = eff.at("output").get<std::string>();
  int dim = eff.at("dim").get<int>();
  int threads = resolve_threads(eff, cli_threads);
  uint64_t seed = eff.at("seed").get<uint64_t>();
  if (dry_run) {
    std::cout << eff.dump(2) << "\n";
    return kOk;
  }

  json summary;
  summary["version"] = tool_version();
  summary["config"] = eff;

  if (experiment == "speed") {
    SpeedMode mode = eff.at("mode").get<std::string>() == "quenched"
                         ? SpeedMode::quenched
                         : SpeedMode::annealed;
    double y = eff.at("y").get<double>();
    SpeedFit fit = speed_fit(law, dim, y,
                             eff.at("t_ladder").get<std::vector<double>>(),
                             eff.at("n").get<long>(), mode, seed,
                             eff.at("dt").get<double>(), threads);
    CsvWriter csv(output + ".csv", eff, {"t", "y", "hits", "n", "logprob", "stderr"});
    for (const auto& p : fit.points) {
      csv.row({format_double(p.t), format_double(y), std::to_string(p.estimate.hits),
               std::to_string(p.estimate.n),
               p.estimate.logprob ? format_double(*p.estimate.logprob) : "",
               format_double(p.estimate.logprob_stderr)});
    }
    summary["exponent"] = fit.exponent;
    summary["slope"] = fit.slope;
    summary["r2"] = fit.r2;
  } else if (experiment == "tail") {
    WalkConfig cfg{dim, eff.at("t").get<double>(), eff.at("dt").get<double>(),
                   eff.at("R").get<double>(), seed};
    Estimate e = annealed_tail(law, cfg, eff.at("y").get<double>(),
                               eff.at("n").get<long>(),
                               {eff.at("tilt_beta").get<double>(), threads});
    CsvWriter csv(output + ".csv", eff, {"t", "y", "hits", "n", "logprob", "stderr"});
    csv.row({format_double(cfg.t), format_double(eff.at("y").get<double>()),
             std::to_string(e.hits), std::to_string(e.n),
             e.logprob ? format_double(*e.logprob) : "",
             format_double(e.logprob_stderr)});
    summary["mean"] = e.mean;
    summary["stderr"] = e.stderr_;
    summary["zero_hits"] = e.zero_hits;
    if (e.logprob) summary["logprob"] = *e.logprob;
  } else if (experiment == "exit") {
    WalkConfig cfg{dim, eff.at("t").get<double>(), eff.at("dt").get<double>(), 1.0,
                   seed};
    CsvWriter csv(output + ".csv", eff, {"R", "tau", "hits", "n", "logprob", "stderr"});
    json rows = json::array();
    for (double R : eff.at("radii").get<std::vector<double>>()) {
      Estimate e = exit_time_check(cfg, R, eff.at("n").get<long>(), threads);
      csv.row({format_double(R), format_double(cfg.t), std::to_string(e.hits),
               std::to_string(e.n), e.logprob ? format_double(*e.logprob) : "",
               format_double(e.logprob_stderr)});
      json row;
      row["R"] = R;
      row["mean"] = e.mean;
      row["zero_hits"] = e.zero_hits;
      if (e.logprob) row["logprob"] = *e.logprob;
      rows.push_back(row);
    }
    summary["points"] = rows;
  } else if (experiment == "feynman_kac") {
    WalkConfig cfg{dim, eff.at("t").get<double>(), eff.at("dt").get<double>(),
                   eff.at("R").get<double>(), seed};
    Scenery sc = scenery_from_config(eff.at("scenery"), law, dim);
    FeynmanKacCheck fk =
        feynman_kac_check(sc, eff.at("delta").get<double>(),
                          eff.at("alpha").get<double>(), cfg,
                          eff.at("n").get<long>(), threads);
    summary["mc"] = fk.mc;
    summary["mc_stderr"] = fk.mc_stderr;
    summary["bound"] = fk.bound;
    summary["lambda"] = fk.lambda;
    summary["c_hat"] = fk.c_hat;
    summary["variance_warning"] = fk.variance_warning;
    CsvWriter csv(output + ".csv", eff, {"mc", "mc_stderr", "bound", "lambda", "c_hat"});
    csv.row({format_double(fk.mc), format_double(fk.mc_stderr),
             format_double(fk.bound), format_double(fk.lambda),
             format_double(fk.c_hat)});
  } else if (experiment == "ks") {
    KsFit fit = ks_scaling(law, dim, eff.at("n_ladder").get<std::vector<long>>(),
                           eff.at("samples").get<long>(), seed, threads);
    CsvWriter csv(output + ".csv", eff, {"n", "second_moment"});
    for (std::size_t i = 0; i < fit.ns.size(); ++i)
      csv.row({format_double(fit.ns[i]), format_double(fit.second_moment[i])});
    summary["exponent"] = fit.exponent;
    summary["r2"] = fit.r2;
    summary["exponent_logcorr"] = fit.exponent_logcorr;
    summary["r2_logcorr"] = fit.r2_logcorr;
  } else {
    throw ConfigError("unknown experiment: " + experiment);
  }
  write_text_file(output + ".json", summary.dump(2) + "\n");
  echo_config(output, eff);
  return kOk;
}

int cmd_spectral(const json& user, bool dry_run, int cli_threads) {
  (void)cli_threads;
  json defaults = {
      {"command", "spectral"},
      {"dim", 1},
      {"grid", json{{"A", 1.0}, {"N", 256}}},
      {"potential", json{{"kind", "zero"}}},
      {"law", json{{"kind", "rademacher"}}},
      {"tol", 0.0},
      {"sub_box", 0.0},
      {"seed", 1},
      {"threads", 0},
      {"output", nullptr},
  };
  json eff = materialize(user, defaults, {"output"});
  int dim = eff.at("dim").get<int>();
  check_keys(eff.at("grid"), {"A", "N"}, "grid");
  Grid grid(dim, eff.at("grid").at("A").get<double>(),
            eff.at("grid").at("N").get<int>());
  double tol = eff.at("tol").get<double>();
  if (tol <= 0.0) tol = default_eigen_tol(dim);
  std::string output = eff.at("output").get<std::string>();
  if (dry_run) {
    std::cout << eff.dump(2) << "\n";
    return kOk;
  }

  const json& pot = eff.at("potential");
  check_keys(pot, {"kind", "value", "file", "seed", "halfwidth", "alpha", "delta", "r"},
             "potential");
  std::string kind = pot.at("kind").get<std::string>();
  std::vector<double> V(grid.cells(), 0.0);
  if (kind == "zero") {
  } else if (kind == "constant") {
    std::fill(V.begin(), V.end(), pot.at("value").get<double>());
  } else if (kind == "scenery") {
    FieldLaw law = law_from_json(eff.at("law"));
    Scenery sc;
    if (pot.contains("file")) {
      sc = read_scenery(pot.at("file").get<std::string>());
    } else {
      int halfwidth = pot.contains("halfwidth")
                          ? pot.at("halfwidth").get<int>()
                          : static_cast<int>(std::ceil(
                                pot.at("r").get<double>() * grid.A / 2.0)) + 2;
      sc = sample_scenery(law, dim, halfwidth,
                          pot.contains("seed") ? pot.at("seed").get<uint64_t>()
                                               : eff.at("seed").get<uint64_t>());
    }
    Profile raster = rasterize_scenery(sc, grid, pot.at("r").get<double>());
    Profile smooth = mollify(raster, Mollifier::make(grid, pot.at("delta").get<double>()));
    double alpha = pot.at("alpha").get<double>();
    for (std::size_t i = 0; i < V.size(); ++i) V[i] = alpha * smooth.values[i];
  } else {
    throw ConfigError("unknown potential kind: " + kind);
  }

  EigenResult eig = principal_eigenvalue(V, grid, tol);
  json summary;
  summary["version"] = tool_version();
  summary["config"] = eff;
  summary["lambda"] = eig.lambda;
  summary["residual"] = eig.residual;
  summary["iterations"] = eig.iterations;

  double sub = eff.at("sub_box").get<double>();
  if (sub > 0.0) {
    auto gap = localization_gap(V, grid, sub, tol);
    summary["lambda_big"] = gap.lambda_big;
    summary["min_sub"] = gap.min_sub;
  }

  Density rho = ground_state_density(eig, grid);
  write_density_csv(output + ".density.csv", rho, eff);
  if (dim == 1) {
    std::vector<double> xs(grid.cells()), ys(grid.cells());
    for (int k = 0; k < grid.n_per_side; ++k) {
      xs[k] = grid.center(k);
      ys[k] = rho.values[k];
    }
    write_text_file(output + ".svg",
                    svg_with_config(
                        svg_line_plot(xs, ys, "ground-state density", "x", "rho"),
                        eff));
  } else if (dim == 2) {
    write_text_file(output + ".svg",
                    svg_with_config(svg_heatmap(grid.n_per_side, rho.values,
                                                "ground-state density"),
                                    eff));
  }
  write_text_file(output + ".json", summary.dump(2) + "\n");
  echo_config(output, eff);
  return kOk;
}

int cmd_verify(const json& user, bool dry_run, int cli_threads) {
  (void)cli_threads;
  json defaults = {
      {"command", "verify"},
      {"filter", ""},
      {"seed", 1},
      {"tolerances", json::object()},
      {"output", ""},
  };
  json eff = materialize(user, defaults, {});
  if (dry_run) {
    std::cout << eff.dump(2) << "\n";
    return kOk;
  }
  VerifyOptions opts;
  opts.filter = eff.at("filter").get<std::string>();
  opts.seed = eff.at("seed").get<uint64_t>();
  for (auto& [key, value] : eff.at("tolerances").items())
    opts.tolerances[key] = value.get<double>();

  auto results = run_verification(opts);
  bool all_pass = true;
  std::printf("%-14s %-42s %-6s %s\n", "group", "check", "state", "detail");
  for (const auto& r : results) {
    all_pass = all_pass && r.pass;
    std::printf("%-14s %-42s %-6s %s\n", r.group.c_str(), r.name.c_str(),
                r.pass ? "PASS" : "FAIL", r.detail.c_str());
  }
  if (results.empty()) {
    std::printf("no checks matched filter \"%s\"\n", opts.filter.c_str());
    return kConfigError;
  }
  std::string output = eff.at("output").get<std::string>();
  if (!output.empty()) {
    json summary;
    summary["version"] = tool_version();
    summary["config"] = eff;
    json rows = json::array();
    for (const auto& r : results)
      rows.push_back({{"group", r.group},
                      {"check", r.name},
                      {"pass", r.pass},
                      {"detail", r.detail}});
    summary["results"] = rows;
    summary["all_pass"] = all_pass;
    write_text_file(output + ".json", summary.dump(2) + "\n");
    echo_config(output, eff);
  }
  return all_pass ? kOk : kPropertyFailure;
}

int cmd_plot(const json& user, bool dry_run, int cli_threads) {
  (void)cli_threads;
  json defaults = {
      {"command", "plot"},
      {"input", nullptr},
      {"output", nullptr},
      {"title", "curve"},
      {"x_label", "x"},
      {"y_label", "value"},
  };
  json eff = materialize(user, defaults, {"input", "output"});
  if (dry_run) {
    std::cout << eff.dump(2) << "\n";
    return kOk;
  }
  std::ifstream in(eff.at("input").get<std::string>());
  if (!in) throw ConfigError("cannot open input csv");
  std::string line;
  std::vector<double> xs, ys;
  bool header_skipped = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_skipped) {
      header_skipped = true;
      continue;
    }
    std::size_t c1 = line.find(',');
    if (c1 == std::string::npos) continue;
    std::size_t c2 = line.find(',', c1 + 1);
    std::string xf = line.substr(0, c1);
    std::string yf = line.substr(c1 + 1, c2 == std::string::npos ? std::string::npos
                                                                 : c2 - c1 - 1);
    try {
      double x = std::stod(xf);
      double y = yf == "inf" ? std::numeric_limits<double>::quiet_NaN() : std::stod(yf);
      xs.push_back(x);
      ys.push_back(y);
    } catch (...) {
      continue;
    }
  }
  if (xs.empty()) throw ConfigError("no plottable rows in input");
  write_text_file(eff.at("output").get<std::string>(),
                  svg_line_plot(xs, ys, eff.at("title").get<std::string>(),
                                eff.at("x_label").get<std::string>(),
                                eff.at("y_label").get<std::string>()));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rate functionals and path simulation for bounded i.i.d. sceneries"};
  app.require_subcommand(1);

  std::string config_path;
  bool dry_run = false;
  int cli_threads = 0;
  app.add_option("--config", config_path, "JSON config file")->required(false);
  app.add_flag("--dry-run", dry_run, "validate the config and echo it, compute nothing");
  app.add_option("--threads", cli_threads, "cap worker threads");

  auto* sub_ratefn = app.add_subcommand("ratefn", "rate-function curves");
  auto* sub_sim = app.add_subcommand("simulate", "Monte Carlo experiments");
  auto* sub_spec = app.add_subcommand("spectral", "principal eigenvalue solves");
  auto* sub_verify = app.add_subcommand("verify", "property suite");
  auto* sub_plot = app.add_subcommand("plot", "replot a curve csv");
  for (auto* sub : {sub_ratefn, sub_sim, sub_spec, sub_verify, sub_plot}) {
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_flag("--dry-run", dry_run);
    sub->add_option("--threads", cli_threads);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    json user = config_path.empty() ? json::object() : load_config(config_path);
    if (app.got_subcommand(sub_ratefn)) return cmd_ratefn(user, dry_run, cli_threads);
    if (app.got_subcommand(sub_sim)) return cmd_simulate(user, dry_run, cli_threads);
    if (app.got_subcommand(sub_spec)) return cmd_spectral(user, dry_run, cli_threads);
    if (app.got_subcommand(sub_verify)) return cmd_verify(user, dry_run, cli_threads);
    if (app.got_subcommand(sub_plot)) return cmd_plot(user, dry_run, cli_threads);
    return kConfigError;
  } catch (const ConfigError& e) {
    json err = {{"error", {{"type", "config"}, {"message", e.what()}}}};
    std::cerr << err.dump() << "\n";
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    json err = {{"error", {{"type", "config"}, {"message", e.what()}}}};
    std::cerr << err.dump() << "\n";
    return kConfigError;
  } catch (const nlohmann::json::exception& e) {
    json err = {{"error", {{"type", "config"}, {"message", e.what()}}}};
    std::cerr << err.dump() << "\n";
    return kConfigError;
  } catch (const ConvergenceError& e) {
    json err = {{"error",
                 {{"type", "non_convergence"},
                  {"message", e.what()},
                  {"residual", e.residual},
                  {"iterations", e.iterations}}}};
    std::cerr << err.dump() << "\n";
    return kNumericalError;
  } catch (const std::exception& e) {
    json err = {{"error", {{"type", "runtime"}, {"message", e.what()}}}};
    std::cerr << err.dump() << "\n";
    return kNumericalError;
  }
}
