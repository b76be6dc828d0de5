// donormag: command-line front end for the donor-spin magnetometry toolkit.

#include "donormag/constants.hpp"
#include "donormag/errors.hpp"
#include "donormag/fit.hpp"
#include "donormag/io.hpp"
#include "donormag/qubit.hpp"
#include "donormag/spincore.hpp"
#include "donormag/thermo.hpp"
#include "donormag/version.hpp"

#include "CLI11.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace donormag;
using io::Cell;
using io::Table;

namespace {

constexpr double kDefaultMicrowaveGHz = 9.6;

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int k = 0; k < len; ++k) {
    out += hex[md[k] >> 4];
    out += hex[md[k] & 15];
  }
  return out;
}

json quantity(double v, const std::string& unit) { return json{{"value", io::rounded(v)}, {"unit", unit}}; }

json count(std::uint64_t v, const std::string& unit) { return json{{"value", v}, {"unit", unit}}; }

std::string num(double v) { return io::format_number(v); }

std::string safe_name(const std::string& name) {
  std::string out = name;
  for (char& c : out) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
  }
  return out;
}

struct Context {
  io::RunConfig config = io::default_run_config();
  std::string format = "csv";
  json inputs = json::array();
  json results = json::object();
  std::vector<std::string> warnings;
  std::vector<std::string> assumptions;

  void add_input(const fs::path& path, const std::string& content) {
    inputs.push_back({{"file", path.filename().string()}, {"sha256", sha256_hex(content)}});
  }
  std::string table_file(const std::string& stem) const { return stem + "." + format; }
  std::string render(const Table& t) const {
    return format == "json" ? io::table_json(t).dump(2) + "\n" : io::table_csv(t);
  }
};

struct Output {
  // The first file is what goes to stdout when no output directory is given.
  std::vector<std::pair<std::string, std::string>> files;
  std::vector<std::string> summary;
};

const SpinSpecies& pick_species(const io::RunConfig& c, const std::string& name) {
  if (name.empty()) return c.species.front();
  for (const auto& s : c.species) {
    if (s.name == name) return s;
  }
  throw UsageError("species '" + name + "' is not defined in the configuration");
}

FitModel two_species_model(const io::RunConfig& c, bool closed_form, bool offset) {
  if (c.species.size() < 2) throw UsageError("this command needs two species in the configuration");
  FitModel m;
  m.basis = {{c.species[0], c.field_mT, closed_form}, {c.species[1], c.field_mT, closed_form}};
  m.include_offset = offset;
  return m;
}

FitModel single_species_model(const SpinSpecies& s, const io::RunConfig& c, bool closed_form, bool offset) {
  FitModel m;
  m.basis = {{s, c.field_mT, closed_form}};
  m.include_offset = offset;
  return m;
}

// ---------------------------------------------------------------- commands

struct LevelsArgs {
  std::string species;
  double B_start = 0.0, B_stop = 0.0;
  int B_count = 0;
  CLI::Option *start_opt = nullptr, *stop_opt = nullptr, *count_opt = nullptr;
};

Output cmd_levels(Context& ctx, const LevelsArgs& a) {
  io::FieldRange range = ctx.config.levels;
  if (a.start_opt->count()) range.start_mT = a.B_start;
  if (a.stop_opt->count()) range.stop_mT = a.B_stop;
  if (a.count_opt->count()) range.count = a.B_count;
  if (range.count < 1 || range.stop_mT < range.start_mT) throw UsageError("empty field range");
  const SpinSpecies& sp = pick_species(ctx.config, a.species);

  Table t{{"B_mT", "level", "E_MHz"}, {}};
  std::vector<int> first_multiplicities;
  for (double B : range.values()) {
    const auto es = eigensystem(build_hamiltonian(sp, FieldPoint(B)));
    if (first_multiplicities.empty()) first_multiplicities = degeneracies(es.energies);
    for (int k = 0; k < es.dimension; ++k) t.add({B, static_cast<long long>(k), es.energies[k]});
  }

  ctx.results["species"] = sp.name;
  ctx.results["dimension"] = count(sp.dimension(), "levels");
  ctx.results["field_start"] = quantity(range.start_mT, "mT");
  ctx.results["field_stop"] = quantity(range.stop_mT, "mT");
  ctx.results["field_points"] = count(range.count, "points");
  ctx.results["multiplicities_at_start"] = json{{"value", first_multiplicities}, {"unit", "levels"}};

  std::ostringstream m;
  for (int d : first_multiplicities) m << ' ' << d;
  return {{{ctx.table_file("levels"), ctx.render(t)}},
          {sp.name + ": " + std::to_string(sp.dimension()) + " levels at " + std::to_string(range.count) +
               " fields from " + num(range.start_mT) + " to " + num(range.stop_mT) + " mT",
           "multiplicities at " + num(range.start_mT) + " mT:" + m.str()}};
}

struct SpeciesArgs {
  std::string species;
};

Output cmd_populations(Context& ctx, const SpeciesArgs& a) {
  const SpinSpecies& sp = pick_species(ctx.config, a.species);
  const double B = ctx.config.field_mT;
  const auto es = eigensystem(build_hamiltonian(sp, FieldPoint(B)));
  const auto grid = ctx.config.temperature_grid.values();

  Table t{{"T_K", "level", "E_MHz", "population"}, {}};
  for (double T : grid) {
    const auto p = populations(es, T);
    for (int k = 0; k < es.dimension; ++k) t.add({T, static_cast<long long>(k), es.energies[k], p[k]});
  }
  ctx.results["species"] = sp.name;
  ctx.results["field"] = quantity(B, "mT");
  ctx.results["temperature_points"] = count(grid.size(), "points");
  ctx.results["ground_population_at_lowest_T"] = quantity(populations(es, grid.front())[0], "1");
  return {{{ctx.table_file("populations"), ctx.render(t)}},
          {sp.name + ": Boltzmann populations of " + std::to_string(es.dimension) + " levels at " + num(B) +
           " mT on " + std::to_string(grid.size()) + " temperatures"}};
}

Output cmd_magnetization(Context& ctx) {
  const auto& c = ctx.config;
  std::vector<WeightedSpecies> weighted;
  for (std::size_t k = 0; k < c.species.size(); ++k) weighted.push_back({c.species[k], c.weights[k]});
  const auto sweep = sweep_magnetization(weighted, c.field_mT, c.temperature_grid.values());

  Output out;
  Table combined{{"T_K"}, {}};
  for (const auto& curve : sweep.curves) combined.columns.push_back("m_" + safe_name(curve.species.name));
  combined.columns.push_back("m_combined");
  for (std::size_t i = 0; i < sweep.T_K.size(); ++i) {
    std::vector<Cell> row{sweep.T_K[i]};
    for (const auto& curve : sweep.curves) row.emplace_back(curve.rows[i].m_exact);
    row.emplace_back(sweep.combined[i]);
    combined.add(std::move(row));
  }

  std::vector<std::pair<std::string, std::string>> per_species;
  json kinks = json::object();
  for (const auto& curve : sweep.curves) {
    const std::string name = curve.species.name;
    const std::string file = "magnetization_" + safe_name(name) + "." + ctx.format;
    per_species.emplace_back(file, ctx.format == "json" ? io::magnetization_json(curve).dump(2) + "\n"
                                                        : io::magnetization_csv(curve));
    if (curve.closed_form_weak_field_warning) {
      ctx.warnings.push_back(name + ": closed-form hyperfine magnetization used beyond the weak-field regime (g muB B > 0.05 A)");
    }
    if (curve.curie_saturation_warning) {
      ctx.warnings.push_back(name + ": Curie form exceeds 0.1 on this grid and is capped at 1");
    }
    if (has_hyperfine_form(curve.species)) {
      double worst = 0.0, peak = 0.0;
      for (const auto& row : curve.rows) {
        worst = std::max(worst, std::abs(*row.m_closed - row.m_exact));
        peak = std::max(peak, std::abs(row.m_exact));
      }
      const double deviation = peak > 0.0 ? worst / peak : 0.0;
      ctx.results["closed_form_max_deviation"][name] = quantity(deviation, "1");
      if (deviation > 0.02) {
        ctx.warnings.push_back(name + ": closed-form magnetization deviates from exact diagonalization by " +
                               num(100.0 * deviation) + "% of the curve maximum");
      }
      if (sweep.T_K.front() < sweep.T_K.back()) {
        const auto kink = find_kink(curve.species, c.field_mT, sweep.T_K.front(), sweep.T_K.back());
        kinks[name] = {{"T", quantity(kink.T_K, "K")}, {"x", quantity(kink.x, "1")}};
        out.summary.push_back(name + ": kink at " + num(kink.T_K * 1e3) + " mK (x = A/kB T = " + num(kink.x) + ")");
      }
    }
  }
  ctx.assumptions.push_back("closed-form magnetization is checked against exact diagonalization with a 2% tolerance");

  ctx.results["field"] = quantity(c.field_mT, "mT");
  ctx.results["temperature_points"] = count(sweep.T_K.size(), "points");
  ctx.results["kinks"] = kinks;
  out.summary.insert(out.summary.begin(), std::to_string(sweep.curves.size()) + " species at " + num(c.field_mT) +
                                              " mT on " + std::to_string(sweep.T_K.size()) + " temperatures");

  const std::pair<std::string, std::string> comb{ctx.table_file("magnetization_combined"), ctx.render(combined)};
  if (per_species.size() == 1) {
    out.files = {per_species.front(), comb};
  } else {
    out.files.push_back(comb);
    out.files.insert(out.files.end(), per_species.begin(), per_species.end());
  }
  return out;
}

struct QubitArgs {
  double start = 0.0, stop = 0.0;
  int count = 0;
  CLI::Option *start_opt = nullptr, *stop_opt = nullptr, *count_opt = nullptr;
};

Output cmd_qubit(Context& ctx, const QubitArgs& a) {
  io::FluxRange r = ctx.config.qubit_sweep;
  if (a.start_opt->count()) r.start_mPhi0 = a.start;
  if (a.stop_opt->count()) r.stop_mPhi0 = a.stop;
  if (a.count_opt->count()) r.count = a.count;
  if (r.count < 1 || r.stop_mPhi0 < r.start_mPhi0) throw UsageError("empty flux range");
  const QubitParams& q = ctx.config.qubit;
  q.validate();

  Table t{{"flux_mPhi0", "f_GHz", "responsivity_GHz_per_mPhi0"}, {}};
  for (int k = 0; k < r.count; ++k) {
    const double d = r.count == 1 ? r.start_mPhi0
                                  : r.start_mPhi0 + (r.stop_mPhi0 - r.start_mPhi0) * k / (r.count - 1);
    t.add({d, qubit_frequency(q, d), responsivity(q, d)});
  }
  const double op = operating_point(q);
  ctx.results["sweet_spot_frequency"] = quantity(qubit_frequency(q, 0.0), "GHz");
  ctx.results["flux_slope"] = quantity(flux_slope(q), "GHz/mPhi0");
  ctx.results["operating_point"] = quantity(op, "mPhi0");
  ctx.results["operating_frequency"] = quantity(qubit_frequency(q, op), "GHz");
  return {{{ctx.table_file("qubit"), ctx.render(t)}},
          {"f(0) = " + num(qubit_frequency(q, 0.0)) + " GHz",
           "asymptotic slope 2 Ip Phi0/h = " + num(flux_slope(q)) + " GHz/mPhi0",
           "operating point (99% of slope): " + num(op) + " mPhi0 at " + num(qubit_frequency(q, op)) + " GHz"}};
}

struct EsrArgs {
  std::string species;
  double f_mw = 0.0, B_start = 0.0, B_stop = 0.0;
  CLI::Option *f_opt = nullptr, *start_opt = nullptr, *stop_opt = nullptr;
};

struct Marker {
  const char* label;
  double g;
};

// Literature g-values shown alongside the computed lines.
constexpr Marker kEsrMarkers[] = {{"P_b0", 2.006}, {"Fe3+", 4.3}, {"Fe0", 2.07}};

Output cmd_esr(Context& ctx, const EsrArgs& a) {
  const auto& es = ctx.config.esr;
  double f = kDefaultMicrowaveGHz;
  if (a.f_opt->count()) {
    f = a.f_mw;
  } else if (es.f_mw_GHz) {
    f = *es.f_mw_GHz;
  } else {
    ctx.assumptions.push_back("microwave frequency not given; " + num(kDefaultMicrowaveGHz) + " GHz (X-band) assumed");
  }
  if (!(f > 0.0)) throw UsageError("microwave frequency must be positive");
  ResonanceSearch search;
  search.B_start_mT = a.start_opt->count() ? a.B_start : es.B_start_mT;
  search.B_stop_mT = a.stop_opt->count() ? a.B_stop : es.B_stop_mT;
  search.grid_points = es.grid;
  search.intensity_floor = es.intensity_floor;
  if (search.B_stop_mT <= search.B_start_mT || search.B_start_mT < 0.0) throw UsageError("empty field range");

  const SpinSpecies& sp = pick_species(ctx.config, a.species);
  const auto all = resonance_fields(sp, f, search);
  const auto lines = strong_lines(all, es.min_relative_intensity);

  Table t{{"B_mT", "g_eff", "intensity", "lower", "upper", "label", "kind"}, {}};
  for (const auto& l : lines) {
    t.add({l.B_mT, l.g_eff, l.intensity, static_cast<long long>(l.i), static_cast<long long>(l.j), sp.name,
           std::string("computed")});
  }
  for (const auto& m : kEsrMarkers) {
    const double B = f * 1e3 / (m.g * constants::kBohrMHzPerMilliTesla);
    t.add({B, m.g, std::string(), std::string(), std::string(), std::string(m.label), std::string("reference")});
  }

  ctx.results["species"] = sp.name;
  ctx.results["microwave_frequency"] = quantity(f, "GHz");
  ctx.results["computed_lines"] = count(lines.size(), "lines");
  ctx.results["weak_lines_omitted"] = count(all.size() - lines.size(), "lines");
  Output out{{{ctx.table_file("esr"), ctx.render(t)}},
             {sp.name + " at " + num(f) + " GHz: " + std::to_string(lines.size()) + " lines with intensity >= " +
              num(es.min_relative_intensity) + " of the strongest (" + std::to_string(all.size() - lines.size()) +
              " weaker lines omitted)"}};
  if (!lines.empty()) {
    double lo = lines.front().intensity, hi = lo;
    for (const auto& l : lines) {
      lo = std::min(lo, l.intensity);
      hi = std::max(hi, l.intensity);
    }
    ctx.results["intensity_spread"] = quantity(hi / lo, "1");
    out.summary.push_back("intensity spread max/min = " + num(hi / lo));
  }
  return out;
}

struct FitArgs {
  std::string data;
  bool closed_form = false;
  bool no_offset = false;
};

std::string padded(const std::string& s, std::size_t width) {
  return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

Output cmd_fit(Context& ctx, const FitArgs& a) {
  const std::string text = io::read_file(a.data);
  ctx.add_input(a.data, text);
  const DataSet data = io::read_dataset_csv(text, a.data);
  const auto& c = ctx.config;
  const FitModel full = two_species_model(c, a.closed_form, !a.no_offset);
  std::vector<std::pair<std::string, FitModel>> reduced;
  for (std::size_t k = 0; k < 2; ++k) {
    reduced.emplace_back(c.species[k].name + " only", single_species_model(c.species[k], c, a.closed_form, !a.no_offset));
  }
  const auto cmp = compare_models(data, full, reduced);
  const FitResult& r = cmp.full;

  json report = io::fit_result_json(r);
  report["basis"] = json::array({c.species[0].name, c.species[1].name});
  report["model_comparison"] = json::array();
  for (const auto& red : cmp.reduced) {
    report["model_comparison"].push_back(
        {{"model", red.label}, {"rss", io::rounded(red.result.rss)}, {"rss_ratio", io::rounded(red.rss_ratio)}});
  }

  const auto T = data.temperatures();
  Table res{{"T_K", "y_uPhi0", "fitted_uPhi0", "residual_uPhi0"}, {}};
  for (std::size_t i = 0; i < data.rows.size(); ++i) {
    res.add({T[i], data.rows[i].y, data.rows[i].y - r.residuals[i], r.residuals[i]});
  }

  Output out{{{"fit.json", report.dump(2) + "\n"}, {ctx.table_file("fit_residuals"), ctx.render(res)}}, {}};
  auto& s = out.summary;
  s.push_back(padded("coefficient", 18) + padded("value", 18) + "sigma");
  std::vector<std::string> labels;
  if (full.include_offset) labels.push_back(" (offset)");
  labels.push_back(" (" + c.species[0].name + ")");
  labels.push_back(" (" + c.species[1].name + ")");
  for (std::size_t k = 0; k < r.names.size(); ++k) {
    const auto idx = static_cast<Eigen::Index>(k);
    s.push_back(padded(r.names[k] + labels[k], 18) + padded(num(r.coefficients(idx)), 18) +
                num(std::sqrt(r.covariance(idx, idx))));
  }
  if (r.ratio) s.push_back("r = c1/(c1+c2) = " + num(r.ratio->value) + " +/- " + num(r.ratio->sigma));
  s.push_back("RSS = " + num(r.rss) + " (n = " + std::to_string(r.n) + ", p = " + std::to_string(r.p) +
              (r.weighted ? ", weighted)" : ", unit weights)"));
  s.push_back(padded("model", 18) + padded("RSS", 18) + "RSS ratio");
  s.push_back(padded("full", 18) + padded(num(r.rss), 18) + "1");
  for (const auto& red : cmp.reduced) {
    s.push_back(padded(red.label, 18) + padded(num(red.result.rss), 18) + num(red.rss_ratio));
  }

  ctx.results["ratio"] = quantity(r.ratio ? r.ratio->value : std::nan(""), "1");
  ctx.results["ratio_sigma"] = quantity(r.ratio ? r.ratio->sigma : std::nan(""), "1");
  ctx.results["rss"] = quantity(r.rss, r.weighted ? "1" : "uPhi0^2");
  ctx.results["n"] = count(r.n, "points");
  for (const auto& red : cmp.reduced) ctx.results["rss_ratio"][red.label] = quantity(red.rss_ratio, "1");
  if (!r.weighted) ctx.assumptions.push_back("no per-point sigma: covariance scaled by RSS/(n-p)");
  if (a.closed_form) ctx.assumptions.push_back("basis functions use the closed-form magnetization");
  return out;
}

struct SensitivityArgs {
  std::string inputs;
};

Output cmd_sensitivity(Context& ctx, const SensitivityArgs& a) {
  SensitivityInputs s;
  if (!a.inputs.empty()) {
    const std::string text = io::read_file(a.inputs);
    ctx.add_input(a.inputs, text);
    s = io::sensitivity_from_json(io::parse_json(text, a.inputs));
  } else if (ctx.config.sensitivity) {
    s = *ctx.config.sensitivity;
  } else {
    throw UsageError("no sensitivity inputs: pass a file or add a 'sensitivity' section to the configuration");
  }
  const QubitParams& q = ctx.config.qubit;
  const auto rep = spin_sensitivity(q, s);
  const double volume = detection_volume(q);
  const double spins = s.detectable_spins.value_or(rep.min_detectable_spins);
  const double per_volume = volume_sensitivity(spins, volume);

  Table t{{"quantity", "value", "unit"}, {}};
  const auto row = [&](const std::string& name, double v, const std::string& unit) {
    t.add({name, v, unit});
    ctx.results[name] = quantity(v, unit);
  };
  row("spin_sensitivity", rep.spins_per_rtHz, "spins/rtHz");
  row("integration_cap", s.integration_cap_s, "s");
  row("min_detectable_spins", rep.min_detectable_spins, "spins");
  row("operating_point", rep.operating_point_mPhi0, "mPhi0");
  row("operating_frequency", rep.operating_frequency_GHz, "GHz");
  row("operating_responsivity", rep.operating_responsivity_GHz_per_mPhi0, "GHz/mPhi0");
  row("detection_volume", volume, "um^3");
  row("detectable_spins", spins, "spins");
  row("volume_sensitivity", per_volume, "spins/um^3");
  if (s.detectable_spins) {
    ctx.assumptions.push_back("volume sensitivity uses the stated detectable spin count " + num(*s.detectable_spins) +
                              "; the noise chain alone gives " + num(rep.min_detectable_spins) + " spins (" +
                              num(volume_sensitivity(rep.min_detectable_spins, volume)) + " spins/um^3)");
  }
  ctx.assumptions.push_back("per-spin flux coupling is an input, not derived from the loop geometry");
  return {{{ctx.table_file("sensitivity"), ctx.render(t)}},
          {"spin sensitivity " + num(rep.spins_per_rtHz) + " spins/rtHz; " + num(rep.min_detectable_spins) +
               " spins in " + num(s.integration_cap_s) + " s",
           "detection volume " + num(volume) + " um^3; volume sensitivity " + num(per_volume) + " spins/um^3"}};
}

Output cmd_synth(Context& ctx, std::optional<std::uint64_t> seed) {
  const auto& c = ctx.config;
  const auto& syn = c.synthetic;
  const FitModel model = two_species_model(c, false, true);
  const auto truth = referenced_truth(model, syn.ratio, syn.scale_uPhi0, syn.reference_T_K);
  const std::uint64_t used = seed.value_or(syn.seed);
  const auto data =
      generate_synthetic(model, truth, c.temperature_grid.values(), syn.noise_sd_uPhi0, used, syn.reference_T_K);

  ctx.results["seed"] = count(used, "1");
  ctx.results["ratio"] = quantity(syn.ratio, "1");
  ctx.results["noise_sd"] = quantity(syn.noise_sd_uPhi0, "uPhi0");
  for (std::size_t k = 0; k < model.coefficient_names().size(); ++k) {
    ctx.results["truth"][model.coefficient_names()[k]] = quantity(truth(static_cast<Eigen::Index>(k)), "uPhi0");
  }
  ctx.assumptions.push_back("synthetic data; the reference temperature is " + num(syn.reference_T_K) + " K");
  return {{{"synthetic.csv", io::write_dataset_csv(data)}},
          {std::to_string(data.rows.size()) + " points, ratio " + num(syn.ratio) + ", noise sd " +
           num(syn.noise_sd_uPhi0) + " uPhi0, seed " + std::to_string(used)}};
}

// ---------------------------------------------------------------- driver

std::string report_text(const Context& ctx, const std::string& command) {
  json report{{"tool", "donormag"},
              {"version", std::string(version())},
              {"command", command},
              {"inputs", ctx.inputs},
              {"results", ctx.results},
              {"warnings", ctx.warnings},
              {"assumptions", ctx.assumptions}};
  return report.dump(2) + "\n";
}

int run(int argc, char** argv) {
  CLI::App app{"Hyperfine donor-spin thermodynamics, flux-qubit magnetometry and species decomposition"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir, format;
  std::uint64_t seed_value = 0;
  app.add_option("--config", config_path, "Run configuration (JSON)");
  app.add_option("--out", out_dir, "Write output files and report.json into this directory");
  app.add_option("--format", format, "Table format")->check(CLI::IsMember({"csv", "json"}));
  auto* seed_opt = app.add_option("--seed", seed_value, "Seed for synthetic data");

  std::function<Output(Context&)> action;

  LevelsArgs levels;
  auto* levels_cmd = app.add_subcommand("levels", "Energy levels versus field");
  levels_cmd->add_option("--species", levels.species, "Species name from the configuration");
  levels.start_opt = levels_cmd->add_option("--B-start", levels.B_start, "First field, mT");
  levels.stop_opt = levels_cmd->add_option("--B-stop", levels.B_stop, "Last field, mT");
  levels.count_opt = levels_cmd->add_option("--B-count", levels.B_count, "Number of fields");
  levels_cmd->callback([&] { action = [&](Context& c) { return cmd_levels(c, levels); }; });

  SpeciesArgs pops;
  auto* pop_cmd = app.add_subcommand("populations", "Thermal level populations on the temperature grid");
  pop_cmd->add_option("--species", pops.species, "Species name from the configuration");
  pop_cmd->callback([&] { action = [&](Context& c) { return cmd_populations(c, pops); }; });

  auto* mag_cmd = app.add_subcommand("magnetization", "Magnetization curves for every species");
  mag_cmd->callback([&] { action = [&](Context& c) { return cmd_magnetization(c); }; });

  QubitArgs qa;
  auto* qubit_cmd = app.add_subcommand("qubit", "Flux-qubit spectrum and responsivity");
  qa.start_opt = qubit_cmd->add_option("--start", qa.start, "First detuning, mPhi0");
  qa.stop_opt = qubit_cmd->add_option("--stop", qa.stop, "Last detuning, mPhi0");
  qa.count_opt = qubit_cmd->add_option("--count", qa.count, "Number of points");
  qubit_cmd->callback([&] { action = [&](Context& c) { return cmd_qubit(c, qa); }; });

  EsrArgs ea;
  auto* esr_cmd = app.add_subcommand("esr", "Resonance fields at fixed microwave frequency");
  esr_cmd->add_option("--species", ea.species, "Species name from the configuration");
  ea.f_opt = esr_cmd->add_option("--f-mw", ea.f_mw, "Microwave frequency, GHz");
  ea.start_opt = esr_cmd->add_option("--B-start", ea.B_start, "Lowest field, mT");
  ea.stop_opt = esr_cmd->add_option("--B-stop", ea.B_stop, "Highest field, mT");
  esr_cmd->callback([&] { action = [&](Context& c) { return cmd_esr(c, ea); }; });

  FitArgs fa;
  auto* fit_cmd = app.add_subcommand("fit", "Two-species decomposition of a flux-shift curve");
  fit_cmd->add_option("data", fa.data, "CSV with T_mK,flux_shift_uPhi0[,sigma_uPhi0]")->required();
  fit_cmd->add_flag("--closed-form", fa.closed_form, "Use the closed-form magnetization as basis");
  fit_cmd->add_flag("--no-offset", fa.no_offset, "Fit without the constant offset");
  fit_cmd->callback([&] { action = [&](Context& c) { return cmd_fit(c, fa); }; });

  SensitivityArgs sa;
  auto* sens_cmd = app.add_subcommand("sensitivity", "Spin and volume sensitivity");
  sens_cmd->add_option("inputs", sa.inputs, "Sensitivity inputs (JSON)");
  sens_cmd->callback([&] { action = [&](Context& c) { return cmd_sensitivity(c, sa); }; });

  auto* synth_cmd = app.add_subcommand("synth", "Seeded synthetic flux-shift data");
  synth_cmd->callback([&] {
    action = [&](Context& c) {
      return cmd_synth(c, seed_opt->count() ? std::optional<std::uint64_t>(seed_value) : std::nullopt);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  Context ctx;
  if (!config_path.empty()) {
    const std::string text = io::read_file(config_path);
    ctx.add_input(config_path, text);
    ctx.config = io::run_config_from_json(io::parse_json(text, config_path));
  }
  ctx.config.validate();
  ctx.format = format.empty() ? ctx.config.output_format : format;
  if (out_dir.empty()) out_dir = ctx.config.output_dir;

  const std::string command = app.get_subcommands().front()->get_name();
  const Output out = action(ctx);

  if (out_dir.empty()) {
    std::cout << out.files.front().second;
    for (const auto& line : out.summary) std::cerr << line << '\n';
  } else {
    fs::create_directories(out_dir);
    for (const auto& [name, content] : out.files) io::write_file(fs::path(out_dir) / name, content);
    io::write_file(fs::path(out_dir) / "report.json", report_text(ctx, command));
    for (const auto& line : out.summary) std::cout << line << '\n';
  }
  for (const auto& w : ctx.warnings) std::cerr << "warning: " << w << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const io::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
