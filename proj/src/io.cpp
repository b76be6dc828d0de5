#include "donormag/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace donormag::io {

using nlohmann::json;

std::string format_number(double v) {
  if (v == 0.0) return "0";  // also folds -0
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 9);
  return std::string(buf, res.ptr);
}

double rounded(double v) {
  const std::string s = format_number(v);
  double out = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), out);
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t k = 0; k < end; ++k) {
      if (text[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": invalid JSON");
  }
}

json load_json(const std::filesystem::path& path) { return parse_json(read_file(path), path.string()); }

namespace {

void require_object(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError("field '" + where + "': expected an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& item : j.items()) {
    if (!keys.count(item.key())) throw ConfigError("field '" + where + "." + item.key() + "': unknown key");
  }
}

double number(const json& j, const char* key, const std::string& where, std::optional<double> fallback = {}) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError("field '" + where + "." + key + "': missing");
  }
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError("field '" + where + "." + key + "': expected a number");
  return v.get<double>();
}

int integer(const json& j, const char* key, const std::string& where, int fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError("field '" + where + "." + key + "': expected an integer");
  return v.get<int>();
}

std::string text(const json& j, const char* key, const std::string& where, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_string()) throw ConfigError("field '" + where + "." + key + "': expected a string");
  return v.get<std::string>();
}

template <typename Fn>
auto checked(const std::string& where, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError("field '" + where + "': " + e.what());
  }
}

}  // namespace

SpinSpecies species_from_json(const json& j, const std::string& where) {
  if (j.is_string()) {
    return checked(where, [&] { return bundled_species(j.get<std::string>()); });
  }
  require_object(j, where, {"name", "S", "I", "g", "A_MHz"});
  SpinSpecies s;
  s.name = text(j, "name", where, "");
  if (s.name.empty()) throw ConfigError("field '" + where + ".name': missing");
  s.S = number(j, "S", where, 0.5);
  s.I = number(j, "I", where);
  s.g = number(j, "g", where);
  s.A_MHz = number(j, "A_MHz", where, 0.0);
  checked(where, [&] {
    s.validate();
    return 0;
  });
  return s;
}

json species_to_json(const SpinSpecies& s) {
  return json{{"name", s.name}, {"S", s.S}, {"I", s.I}, {"g", s.g}, {"A_MHz", s.A_MHz}};
}

QubitParams qubit_from_json(const json& j, const std::string& where) {
  require_object(j, where, {"Ip_nA", "Delta_GHz", "loop_area_um2", "effective_depth_um"});
  QubitParams q;
  q.Ip_nA = number(j, "Ip_nA", where);
  q.Delta_GHz = number(j, "Delta_GHz", where);
  q.loop_area_um2 = number(j, "loop_area_um2", where);
  q.effective_depth_um = number(j, "effective_depth_um", where);
  checked(where, [&] {
    q.validate();
    return 0;
  });
  return q;
}

SensitivityInputs sensitivity_from_json(const json& j, const std::string& where) {
  require_object(j, where, {"flux_noise_uPhi0_per_rtHz", "per_spin_flux_uPhi0", "integration_cap_s", "detectable_spins"});
  SensitivityInputs s;
  s.flux_noise_uPhi0_per_rtHz = number(j, "flux_noise_uPhi0_per_rtHz", where);
  s.per_spin_flux_uPhi0 = number(j, "per_spin_flux_uPhi0", where);
  s.integration_cap_s = number(j, "integration_cap_s", where, 1.0);
  if (j.contains("detectable_spins")) s.detectable_spins = number(j, "detectable_spins", where);
  checked(where, [&] {
    s.validate();
    return 0;
  });
  return s;
}

Spacing parse_spacing(const std::string& keyword) {
  if (keyword == "linear") return Spacing::Linear;
  if (keyword == "log") return Spacing::Log;
  if (keyword == "inverse-T") return Spacing::InverseT;
  throw ConfigError("unknown spacing '" + keyword + "' (expected linear, log or inverse-T)");
}

std::string spacing_name(Spacing s) {
  switch (s) {
    case Spacing::Linear: return "linear";
    case Spacing::Log: return "log";
    case Spacing::InverseT: return "inverse-T";
  }
  return "linear";
}

std::vector<double> TemperatureGrid::values() const {
  if (count < 1) throw ConfigError("temperature grid count must be >= 1");
  if (!(start_K > 0.0) || !(stop_K > 0.0)) throw ConfigError("temperature grid bounds must be positive");
  std::vector<double> T(static_cast<std::size_t>(count));
  if (count == 1) {
    T[0] = start_K;
    return T;
  }
  for (int k = 0; k < count; ++k) {
    const double f = static_cast<double>(k) / (count - 1);
    switch (spacing) {
      case Spacing::Linear: T[k] = start_K + f * (stop_K - start_K); break;
      case Spacing::Log: T[k] = std::exp(std::log(start_K) + f * (std::log(stop_K) - std::log(start_K))); break;
      case Spacing::InverseT: T[k] = 1.0 / (1.0 / start_K + f * (1.0 / stop_K - 1.0 / start_K)); break;
    }
  }
  T.front() = start_K;
  T.back() = stop_K;
  std::sort(T.begin(), T.end());
  return T;
}

std::vector<double> FieldRange::values() const {
  if (count < 1) throw ConfigError("field range count must be >= 1");
  if (!(start_mT >= 0.0) || stop_mT < start_mT) throw ConfigError("field range must be ascending and non-negative");
  std::vector<double> B(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    B[k] = count == 1 ? start_mT : start_mT + (stop_mT - start_mT) * k / (count - 1);
  }
  return B;
}

void RunConfig::validate() const {
  if (species.empty()) throw ConfigError("field 'species': at least one species is required");
  if (weights.size() != species.size()) throw ConfigError("field 'weights': one weight per species is required");
  if (!(field_mT >= 0.0)) throw ConfigError("field 'field_mT': must be >= 0");
  if (temperature_grid.count < 1) throw ConfigError("field 'temperature_grid.count': must be >= 1");
  if (!(temperature_grid.start_K > 0.0) || !(temperature_grid.stop_K > 0.0)) {
    throw ConfigError("field 'temperature_grid': start_K and stop_K must be positive");
  }
  if (output_format != "csv" && output_format != "json") {
    throw ConfigError("field 'output_format': expected csv or json");
  }
  qubit.validate();
}

RunConfig default_run_config() {
  RunConfig c;
  c.species = {bismuth(), bare_spin_half()};
  c.weights = {0.873, 0.127};
  return c;
}

RunConfig run_config_from_json(const json& j) {
  require_object(j, "config",
                 {"species", "weights", "qubit", "sensitivity", "field_mT", "temperature_grid", "levels", "esr",
                  "qubit_sweep", "synthetic", "output_dir", "output_format"});
  RunConfig c = default_run_config();
  if (j.contains("species")) {
    const json& list = j.at("species");
    if (!list.is_array() || list.empty()) throw ConfigError("field 'species': expected a non-empty array");
    c.species.clear();
    for (std::size_t k = 0; k < list.size(); ++k) {
      c.species.push_back(species_from_json(list[k], "species[" + std::to_string(k) + "]"));
    }
    c.weights.assign(c.species.size(), 1.0);
  }
  if (j.contains("weights")) {
    const json& w = j.at("weights");
    if (!w.is_array()) throw ConfigError("field 'weights': expected an array");
    c.weights.clear();
    for (std::size_t k = 0; k < w.size(); ++k) {
      if (!w[k].is_number()) throw ConfigError("field 'weights[" + std::to_string(k) + "]': expected a number");
      c.weights.push_back(w[k].get<double>());
    }
  }
  if (j.contains("qubit")) c.qubit = qubit_from_json(j.at("qubit"));
  if (j.contains("sensitivity")) c.sensitivity = sensitivity_from_json(j.at("sensitivity"));
  c.field_mT = number(j, "field_mT", "config", c.field_mT);
  if (j.contains("temperature_grid")) {
    const json& g = j.at("temperature_grid");
    const std::string where = "temperature_grid";
    require_object(g, where, {"start_K", "stop_K", "count", "spacing"});
    auto& t = c.temperature_grid;
    t.start_K = number(g, "start_K", where, t.start_K);
    t.stop_K = number(g, "stop_K", where, t.stop_K);
    t.count = integer(g, "count", where, t.count);
    try {
      t.spacing = parse_spacing(text(g, "spacing", where, spacing_name(t.spacing)));
    } catch (const ConfigError& e) {
      throw ConfigError("field 'temperature_grid.spacing': " + std::string(e.what()));
    }
  }
  if (j.contains("levels")) {
    const json& l = j.at("levels");
    require_object(l, "levels", {"B_start_mT", "B_stop_mT", "B_count"});
    c.levels.start_mT = number(l, "B_start_mT", "levels", c.levels.start_mT);
    c.levels.stop_mT = number(l, "B_stop_mT", "levels", c.levels.stop_mT);
    c.levels.count = integer(l, "B_count", "levels", c.levels.count);
  }
  if (j.contains("esr")) {
    const json& e = j.at("esr");
    require_object(e, "esr", {"f_mw_GHz", "B_start_mT", "B_stop_mT", "grid", "intensity_floor", "min_relative_intensity"});
    if (e.contains("f_mw_GHz")) c.esr.f_mw_GHz = number(e, "f_mw_GHz", "esr");
    c.esr.B_start_mT = number(e, "B_start_mT", "esr", c.esr.B_start_mT);
    c.esr.B_stop_mT = number(e, "B_stop_mT", "esr", c.esr.B_stop_mT);
    c.esr.grid = integer(e, "grid", "esr", c.esr.grid);
    c.esr.intensity_floor = number(e, "intensity_floor", "esr", c.esr.intensity_floor);
    c.esr.min_relative_intensity = number(e, "min_relative_intensity", "esr", c.esr.min_relative_intensity);
  }
  if (j.contains("qubit_sweep")) {
    const json& q = j.at("qubit_sweep");
    require_object(q, "qubit_sweep", {"start_mPhi0", "stop_mPhi0", "count"});
    c.qubit_sweep.start_mPhi0 = number(q, "start_mPhi0", "qubit_sweep", c.qubit_sweep.start_mPhi0);
    c.qubit_sweep.stop_mPhi0 = number(q, "stop_mPhi0", "qubit_sweep", c.qubit_sweep.stop_mPhi0);
    c.qubit_sweep.count = integer(q, "count", "qubit_sweep", c.qubit_sweep.count);
  }
  if (j.contains("synthetic")) {
    const json& s = j.at("synthetic");
    require_object(s, "synthetic", {"ratio", "scale_uPhi0", "noise_sd_uPhi0", "seed", "reference_T_K"});
    auto& syn = c.synthetic;
    syn.ratio = number(s, "ratio", "synthetic", syn.ratio);
    syn.scale_uPhi0 = number(s, "scale_uPhi0", "synthetic", syn.scale_uPhi0);
    syn.noise_sd_uPhi0 = number(s, "noise_sd_uPhi0", "synthetic", syn.noise_sd_uPhi0);
    syn.reference_T_K = number(s, "reference_T_K", "synthetic", syn.reference_T_K);
    if (s.contains("seed")) {
      if (!s.at("seed").is_number_unsigned()) throw ConfigError("field 'synthetic.seed': expected an unsigned integer");
      syn.seed = s.at("seed").get<std::uint64_t>();
    }
  }
  c.output_dir = text(j, "output_dir", "config", c.output_dir);
  c.output_format = text(j, "output_format", "config", c.output_format);
  checked("config", [&] {
    c.validate();
    return 0;
  });
  return c;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto res = std::from_chars(first, s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size() && std::isfinite(out);
}

struct CsvLines {
  std::vector<std::string> header;
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;  // (line number, cells)
};

CsvLines split_csv(const std::string& text, const std::string& origin) {
  CsvLines out;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[0] == '#') continue;
    if (out.header.empty()) {
      out.header = split_csv_line(line);
    } else {
      out.rows.emplace_back(number, split_csv_line(line));
    }
  }
  if (out.header.empty()) throw ConfigError(origin + ": missing CSV header");
  return out;
}

}  // namespace

DataSet read_dataset_csv(const std::string& text, const std::string& origin) {
  const CsvLines csv = split_csv(text, origin);
  const bool with_sigma = csv.header.size() == 3;
  const bool header_ok = (csv.header.size() == 2 || with_sigma) && csv.header[0] == "T_mK" &&
                         csv.header[1] == "flux_shift_uPhi0" && (!with_sigma || csv.header[2] == "sigma_uPhi0");
  if (!header_ok) {
    throw ConfigError(origin + ": expected header 'T_mK,flux_shift_uPhi0[,sigma_uPhi0]'");
  }
  DataSet data;
  for (const auto& [line, cells] : csv.rows) {
    const std::string at = origin + ":" + std::to_string(line);
    if (cells.size() != csv.header.size()) {
      throw ConfigError(at + ": row has " + std::to_string(cells.size()) + " fields, expected " +
                        std::to_string(csv.header.size()));
    }
    double T_mK = 0.0, y = 0.0, sigma = 0.0;
    if (!parse_double(cells[0], T_mK) || !parse_double(cells[1], y) || (with_sigma && !parse_double(cells[2], sigma))) {
      throw ConfigError(at + ": malformed number");
    }
    if (!(T_mK > 0.0)) throw ConfigError(at + ": temperature must be positive");
    if (with_sigma && !(sigma > 0.0)) throw ConfigError(at + ": sigma must be positive");
    DataRow row{T_mK * 1e-3, y, std::nullopt};
    if (with_sigma) row.sigma = sigma;
    data.rows.push_back(row);
  }
  try {
    data.normalize();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return data;
}

std::string write_dataset_csv(const DataSet& data) {
  std::ostringstream out;
  const bool sigma = data.has_sigma();
  out << "T_mK,flux_shift_uPhi0" << (sigma ? ",sigma_uPhi0" : "") << '\n';
  for (const auto& row : data.rows) {
    out << format_number(row.T_K * 1e3) << ',' << format_number(row.y);
    if (sigma) out << ',' << format_number(*row.sigma);
    out << '\n';
  }
  return out.str();
}

std::string magnetization_csv(const MagnetizationCurve& curve) {
  const bool has_closed = !curve.rows.empty() && curve.rows.front().m_closed.has_value();
  std::ostringstream out;
  out << "T_K,m_exact" << (has_closed ? ",m_closed" : "") << ",m_curie\n";
  for (const auto& row : curve.rows) {
    out << format_number(row.T_K) << ',' << format_number(row.m_exact);
    if (has_closed) out << ',' << format_number(*row.m_closed);
    out << ',' << format_number(row.m_curie) << '\n';
  }
  return out.str();
}

json magnetization_json(const MagnetizationCurve& curve) {
  json rows = json::array();
  for (const auto& row : curve.rows) {
    json r{{"T_K", rounded(row.T_K)}, {"m_exact", rounded(row.m_exact)}};
    if (row.m_closed) r["m_closed"] = rounded(*row.m_closed);
    r["m_curie"] = rounded(row.m_curie);
    rows.push_back(std::move(r));
  }
  return json{{"species", curve.species.name}, {"B_mT", rounded(curve.B_mT)}, {"rows", std::move(rows)}};
}

NumericTable read_numeric_csv(const std::string& text, const std::string& origin) {
  const CsvLines csv = split_csv(text, origin);
  NumericTable table;
  table.columns = csv.header;
  for (const auto& [line, cells] : csv.rows) {
    const std::string at = origin + ":" + std::to_string(line);
    if (cells.size() != csv.header.size()) throw ConfigError(at + ": wrong number of fields");
    std::vector<double> values(cells.size());
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (!parse_double(cells[k], values[k])) throw ConfigError(at + ": malformed number");
    }
    table.rows.push_back(std::move(values));
  }
  return table;
}

NumericTable read_magnetization_csv(const std::string& text, const std::string& origin) {
  NumericTable table = read_numeric_csv(text, origin);
  const auto& c = table.columns;
  const bool ok = (c.size() == 3 && c[0] == "T_K" && c[1] == "m_exact" && c[2] == "m_curie") ||
                  (c.size() == 4 && c[0] == "T_K" && c[1] == "m_exact" && c[2] == "m_closed" && c[3] == "m_curie");
  if (!ok) throw ConfigError(origin + ": expected header 'T_K,m_exact[,m_closed],m_curie'");
  return table;
}

json fit_result_json(const FitResult& r) {
  json coefficients = json::object();
  for (std::size_t k = 0; k < r.names.size(); ++k) {
    coefficients[r.names[k]] = rounded(r.coefficients(static_cast<Eigen::Index>(k)));
  }
  json cov = json::array();
  for (Eigen::Index i = 0; i < r.covariance.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < r.covariance.cols(); ++j) row.push_back(rounded(r.covariance(i, j)));
    cov.push_back(std::move(row));
  }
  json residuals = json::array();
  for (double v : r.residuals) residuals.push_back(rounded(v));
  json out{{"coefficients", std::move(coefficients)},
           {"covariance", std::move(cov)},
           {"rss", rounded(r.rss)},
           {"n", r.n},
           {"weighted", r.weighted},
           {"residuals", std::move(residuals)}};
  if (r.ratio) {
    out["ratio"] = rounded(r.ratio->value);
    out["ratio_sigma"] = rounded(r.ratio->sigma);
  } else {
    out["ratio"] = nullptr;
    out["ratio_sigma"] = nullptr;
  }
  return out;
}

void Table::add(std::vector<Cell> row) {
  if (row.size() != columns.size()) throw std::invalid_argument("table row width does not match the header");
  rows.push_back(std::move(row));
}

namespace {

std::string cell_text(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
  if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
  return std::get<std::string>(c);
}

}  // namespace

std::string table_csv(const Table& t) {
  std::ostringstream out;
  for (std::size_t k = 0; k < t.columns.size(); ++k) out << (k ? "," : "") << t.columns[k];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << cell_text(row[k]);
    out << '\n';
  }
  return out.str();
}

json table_json(const Table& t) {
  json out = json::array();
  for (const auto& row : t.rows) {
    json r = json::object();
    for (std::size_t k = 0; k < row.size(); ++k) {
      std::visit(
          [&](const auto& v) {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, double>) {
              r[t.columns[k]] = rounded(v);
            } else {
              r[t.columns[k]] = v;
            }
          },
          row[k]);
    }
    out.push_back(std::move(r));
  }
  return out;
}

Table read_table_csv(const std::string& text, const std::string& origin) {
  const CsvLines csv = split_csv(text, origin);
  Table table;
  table.columns = csv.header;
  for (const auto& [line, cells] : csv.rows) {
    if (cells.size() != csv.header.size()) {
      throw ConfigError(origin + ":" + std::to_string(line) + ": wrong number of fields");
    }
    std::vector<Cell> row;
    for (const auto& cell : cells) {
      long long i = 0;
      double d = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), i);
      if (!cell.empty() && res.ec == std::errc() && res.ptr == cell.data() + cell.size()) {
        row.emplace_back(i);
      } else if (parse_double(cell, d)) {
        row.emplace_back(d);
      } else {
        row.emplace_back(cell);
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace donormag::io
