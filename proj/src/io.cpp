#include "lds/io.hpp"

#include <cstdio>
#include <stdexcept>

namespace lds {

std::string tool_version() { return "ldscenery 0.1.0"; }

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

nlohmann::json law_to_json(const FieldLaw& law) {
  nlohmann::json j;
  j["kind"] = law.kind_name();
  if (law.kind == LawKind::two_point || law.kind == LawKind::discrete) {
    j["values"] = law.atoms;
    j["probs"] = law.probs;
  }
  return j;
}

FieldLaw law_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind"))
    throw std::invalid_argument("law needs a \"kind\" field");
  for (auto& [key, value] : j.items()) {
    (void)value;
    if (key != "kind" && key != "values" && key != "probs" && key != "p" &&
        key != "a" && key != "b")
      throw std::invalid_argument("unknown law key: " + key);
  }
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "rademacher") return FieldLaw::rademacher();
  if (kind == "uniform_symmetric") return FieldLaw::uniform_symmetric();
  if (kind == "two_point") {
    if (j.contains("p"))
      return FieldLaw::two_point(j.at("p").get<double>(), j.at("a").get<double>(),
                                 j.at("b").get<double>());
    return FieldLaw::discrete(j.at("values").get<std::vector<double>>(),
                              j.at("probs").get<std::vector<double>>());
  }
  if (kind == "discrete")
    return FieldLaw::discrete(j.at("values").get<std::vector<double>>(),
                              j.at("probs").get<std::vector<double>>());
  throw std::invalid_argument("unknown law kind: " + kind);
}

nlohmann::json settings_to_json(const RateSettings& s) {
  nlohmann::json j;
  j["feas_tol"] = s.feas_tol;
  j["obj_tol"] = s.obj_tol;
  j["eps_strict"] = s.eps_strict;
  j["eig_tol"] = s.eig_tol;
  j["max_alternations"] = s.max_alternations;
  j["n_random_starts"] = s.n_random_starts;
  j["extrapolate"] = s.extrapolate;
  j["multiplier_cap"] = s.multiplier_cap;
  return j;
}

RateSettings settings_from_json(const nlohmann::json& j, int dim) {
  RateSettings s;
  s.dim = dim;
  for (auto& [key, value] : j.items()) {
    if (key == "feas_tol") s.feas_tol = value.get<double>();
    else if (key == "obj_tol") s.obj_tol = value.get<double>();
    else if (key == "eps_strict") s.eps_strict = value.get<double>();
    else if (key == "eig_tol") s.eig_tol = value.get<double>();
    else if (key == "max_alternations") s.max_alternations = value.get<int>();
    else if (key == "n_random_starts") s.n_random_starts = value.get<int>();
    else if (key == "extrapolate") s.extrapolate = value.get<bool>();
    else if (key == "multiplier_cap") s.multiplier_cap = value.get<double>();
    else throw std::invalid_argument("unknown settings key: " + key);
  }
  return s;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const nlohmann::json& config,
                     const std::vector<std::string>& header) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path);
  if (!out_) throw std::runtime_error("cannot open " + path.string());
  out_ << "# " << tool_version() << "\n";
  out_ << "# config: " << config.dump() << "\n";
  for (std::size_t i = 0; i < header.size(); ++i)
    out_ << header[i] << (i + 1 < header.size() ? "," : "");
  out_ << "\n";
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i)
    out_ << fields[i] << (i + 1 < fields.size() ? "," : "");
  out_ << "\n";
}

void CsvWriter::close() { out_.close(); }

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << content;
}

void write_curve_csv(const std::filesystem::path& path, const RateCurve& curve,
                     const nlohmann::json& config) {
  CsvWriter csv(path, config, {"x", "value", "feasibility", "A", "N"});
  for (const auto& p : curve.points) {
    csv.row({format_double(p.x),
             p.value.finite ? format_double(p.value.value) : "inf",
             format_double(p.feasibility), format_double(curve.settings.A),
             std::to_string(curve.settings.N)});
  }
}

void write_scenery(const std::filesystem::path& base, const Scenery& scenery) {
  std::filesystem::path bin = base;
  bin += ".bin";
  std::filesystem::path header = base;
  header += ".json";
  if (base.has_parent_path()) std::filesystem::create_directories(base.parent_path());
  std::ofstream out(bin, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + bin.string());
  out.write(reinterpret_cast<const char*>(scenery.values.data()),
            static_cast<std::streamsize>(scenery.values.size() * sizeof(double)));
  nlohmann::json j;
  j["dim"] = scenery.dim;
  j["halfwidth"] = scenery.halfwidth;
  j["seed"] = scenery.seed;
  j["law"] = law_to_json(scenery.law);
  j["count"] = scenery.values.size();
  write_text_file(header, j.dump(2) + "\n");
}

Scenery read_scenery(const std::filesystem::path& base) {
  std::filesystem::path bin = base;
  bin += ".bin";
  std::filesystem::path header = base;
  header += ".json";
  std::ifstream hin(header);
  if (!hin) throw std::runtime_error("cannot open " + header.string());
  nlohmann::json j = nlohmann::json::parse(hin);
  Scenery sc;
  sc.dim = j.at("dim").get<int>();
  sc.halfwidth = j.at("halfwidth").get<int>();
  sc.seed = j.at("seed").get<uint64_t>();
  sc.law = law_from_json(j.at("law"));
  std::size_t count = j.at("count").get<std::size_t>();
  sc.values.resize(count);
  std::ifstream in(bin, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + bin.string());
  in.read(reinterpret_cast<char*>(sc.values.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (static_cast<std::size_t>(in.gcount()) != count * sizeof(double))
    throw std::runtime_error("scenery payload truncated: " + bin.string());
  return sc;
}

void write_density_csv(const std::filesystem::path& path, const Density& rho,
                       const nlohmann::json& config) {
  CsvWriter csv(path, config, {"cell", "value"});
  for (std::size_t i = 0; i < rho.values.size(); ++i)
    csv.row({std::to_string(i), format_double(rho.values[i])});
}

void write_grid_field(const std::filesystem::path& base, const Grid& grid,
                      const std::vector<double>& values, const std::string& kind) {
  std::filesystem::path bin = base;
  bin += ".bin";
  std::filesystem::path header = base;
  header += ".json";
  if (base.has_parent_path()) std::filesystem::create_directories(base.parent_path());
  std::ofstream out(bin, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + bin.string());
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
  nlohmann::json j;
  j["kind"] = kind;
  j["dim"] = grid.dim;
  j["A"] = grid.A;
  j["N"] = grid.n_per_side;
  j["count"] = values.size();
  write_text_file(header, j.dump(2) + "\n");
}

std::pair<Grid, std::vector<double>> read_grid_field(
    const std::filesystem::path& base, std::string* kind) {
  std::filesystem::path bin = base;
  bin += ".bin";
  std::filesystem::path header = base;
  header += ".json";
  std::ifstream hin(header);
  if (!hin) throw std::runtime_error("cannot open " + header.string());
  nlohmann::json j = nlohmann::json::parse(hin);
  Grid grid(j.at("dim").get<int>(), j.at("A").get<double>(), j.at("N").get<int>());
  if (kind) *kind = j.at("kind").get<std::string>();
  std::size_t count = j.at("count").get<std::size_t>();
  std::vector<double> values(count);
  std::ifstream in(bin, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + bin.string());
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (static_cast<std::size_t>(in.gcount()) != count * sizeof(double))
    throw std::runtime_error("field payload truncated: " + bin.string());
  return {grid, std::move(values)};
}

}  // namespace lds
