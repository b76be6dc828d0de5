#pragma once

#include "donormag/fit.hpp"
#include "donormag/qubit.hpp"
#include "donormag/spincore.hpp"
#include "donormag/thermo.hpp"

#include "json.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace donormag::io {

/// Malformed or invalid configuration/data content.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// File could not be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// printf("%.9g")-style decimal: 9 significant digits, '.' separator,
/// independent of the global locale.
std::string format_number(double v);

/// format_number rounded back to a double, for JSON emission.
double rounded(double v);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

/// Parses a JSON document, reporting syntax errors as "<origin>:<line>:<col>".
nlohmann::json parse_json(const std::string& text, const std::string& origin);
nlohmann::json load_json(const std::filesystem::path& path);

// Domain objects from JSON. `where` prefixes field diagnostics.
SpinSpecies species_from_json(const nlohmann::json& j, const std::string& where = "species");
nlohmann::json species_to_json(const SpinSpecies& s);
QubitParams qubit_from_json(const nlohmann::json& j, const std::string& where = "qubit");
SensitivityInputs sensitivity_from_json(const nlohmann::json& j, const std::string& where = "sensitivity");

enum class Spacing { Linear, Log, InverseT };

struct TemperatureGrid {
  double start_K = 0.03;
  double stop_K = 0.2;
  int count = 35;
  Spacing spacing = Spacing::Linear;

  /// Ascending temperatures. A single-point grid returns {start}.
  std::vector<double> values() const;
};

Spacing parse_spacing(const std::string& keyword);
std::string spacing_name(Spacing s);

struct FieldRange {
  double start_mT = 0.0;
  double stop_mT = 500.0;
  int count = 101;
  std::vector<double> values() const;
};

struct EsrSettings {
  std::optional<double> f_mw_GHz;  // defaults to 9.6 GHz (assumed X-band value)
  double B_start_mT = 0.0;
  double B_stop_mT = 1000.0;
  int grid = 2000;
  double intensity_floor = 1e-6;
  double min_relative_intensity = 0.1;
};

struct FluxRange {
  double start_mPhi0 = -5.0;
  double stop_mPhi0 = 5.0;
  int count = 101;
};

struct SyntheticSettings {
  double ratio = 0.873;
  double scale_uPhi0 = 1000.0;
  double noise_sd_uPhi0 = 0.0036;
  std::uint64_t seed = 20240101;
  double reference_T_K = 0.2;
};

struct RunConfig {
  std::vector<SpinSpecies> species;
  std::vector<double> weights;
  QubitParams qubit;
  std::optional<SensitivityInputs> sensitivity;
  double field_mT = 0.2;
  TemperatureGrid temperature_grid;
  FieldRange levels;
  EsrSettings esr;
  FluxRange qubit_sweep;
  SyntheticSettings synthetic;
  std::string output_dir;
  std::string output_format = "csv";

  void validate() const;
};

/// Defaults: species Bi and e12 with weights 0.873/0.127, the reference qubit.
RunConfig default_run_config();
RunConfig run_config_from_json(const nlohmann::json& j);

// Flux-shift data: header `T_mK,flux_shift_uPhi0[,sigma_uPhi0]`.
DataSet read_dataset_csv(const std::string& text, const std::string& origin);
std::string write_dataset_csv(const DataSet& data);

/// Tidy CSV `T_K,m_exact,m_closed,m_curie`; the m_closed column is omitted for
/// species without a hyperfine closed form.
std::string magnetization_csv(const MagnetizationCurve& curve);
nlohmann::json magnetization_json(const MagnetizationCurve& curve);

struct NumericTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};
/// Reads back a magnetization CSV produced by magnetization_csv.
NumericTable read_magnetization_csv(const std::string& text, const std::string& origin);

/// Generic numeric CSV reader: header line plus rows of numbers.
NumericTable read_numeric_csv(const std::string& text, const std::string& origin);

nlohmann::json fit_result_json(const FitResult& r);

/// Mixed-type tidy table used for CLI output. Text cells must not contain
/// commas or line breaks.
using Cell = std::variant<double, long long, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
};

std::string table_csv(const Table& t);
/// Array of records keyed by column name.
nlohmann::json table_json(const Table& t);
/// Integers stay integers, other numbers become doubles, the rest text.
Table read_table_csv(const std::string& text, const std::string& origin);

}  // namespace donormag::io
