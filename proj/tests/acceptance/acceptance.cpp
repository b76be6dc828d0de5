// Acceptance checks: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include "donormag/constants.hpp"
#include "donormag/fit.hpp"
#include "donormag/io.hpp"
#include "donormag/qubit.hpp"
#include "donormag/spincore.hpp"
#include "donormag/thermo.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>

using namespace donormag;
using constants::kBohrMHzPerMilliTesla;
using constants::kBoltzmannMHzPerKelvin;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& name, const std::function<Outcome()>& check) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::cout << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << name << ": " << o.detail << " ("
            << io::format_number(ms) << " ms)" << std::endl;
}

std::string fmt(double v) { return io::format_number(v); }

double T_from_x(const SpinSpecies& sp, double x) { return sp.A_MHz / (kBoltzmannMHzPerKelvin * x); }

std::string data_path(const std::string& name) { return std::string(DONORMAG_DATA_DIR) + "/" + name; }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

Outcome zero_field_splitting() {
  const auto es = eigensystem(build_hamiltonian(bismuth(), FieldPoint(0.0)));
  const double lower = std::accumulate(es.energies.begin(), es.energies.begin() + 9, 0.0) / 9.0;
  const double upper = std::accumulate(es.energies.begin() + 9, es.energies.end(), 0.0) / 11.0;
  const double split = upper - lower;
  const double rel = std::abs(split - 7377.0) / 7377.0;
  return {rel <= 1e-6, "E(F=5) - E(F=4) = " + fmt(split) + " MHz, relative error " + fmt(rel)};
}

Outcome oracle_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto sp = bismuth();
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const double B = 1000.0 * k / 49.0;
    const auto es = eigensystem(build_hamiltonian(sp, FieldPoint(B)));
    auto oracle = breit_rabi_levels(sp, FieldPoint(B));
    std::sort(oracle.begin(), oracle.end());
    double scale = 0.0;
    for (double e : oracle) scale = std::max(scale, std::abs(e));
    for (std::size_t n = 0; n < oracle.size(); ++n) worst = std::max(worst, std::abs(es.energies[n] - oracle[n]) / scale);
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {worst <= 1e-8 && s < 1.0,
          "50 fields 0-1000 mT, 20 levels, max relative deviation " + fmt(worst) + ", " + fmt(s) + " s"};
}

Outcome degeneracy_structure() {
  const auto es = eigensystem(build_hamiltonian(bismuth(), FieldPoint(0.0)));
  const auto d = degeneracies(es.energies, 1e-6);
  std::string text;
  for (int v : d) text += (text.empty() ? "" : ", ") + std::to_string(v);
  return {d == std::vector<int>{9, 11}, "multiplicities {" + text + "}"};
}

Outcome limiting_slopes() {
  const auto sp = bismuth();
  const double B = 0.2;
  const double zeeman = sp.g * kBohrMHzPerMilliTesla * B / sp.A_MHz;
  double worst_high = 0.0;
  for (double x : {0.05, 0.03, 0.02, 0.01, 0.005, 0.001}) {
    const double slope = magnetization_exact(sp, B, T_from_x(sp, x)) / x;
    worst_high = std::max(worst_high, std::abs(slope / (0.5 * zeeman) - 1.0));
  }
  std::vector<double> xs, ms;
  for (int k = 0; k <= 40; ++k) {
    xs.push_back(3.0 + 0.05 * k);
    ms.push_back(magnetization_exact(sp, B, T_from_x(sp, xs.back())));
  }
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  const double my = std::accumulate(ms.begin(), ms.end(), 0.0) / ms.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxy += (xs[k] - mx) * (ms[k] - my);
    sxx += (xs[k] - mx) * (xs[k] - mx);
  }
  const double low = std::abs(sxy / sxx / (2.0 / 15.0 * zeeman) - 1.0);
  return {worst_high <= 0.01 && low <= 0.02,
          "x <= 0.05: max deviation from slope 1/2 " + fmt(worst_high) + "; x in [3,5]: deviation from 2/15 " +
              fmt(low)};
}

Outcome kink_location() {
  const auto k = find_kink(bismuth(), 0.2, 0.03, 0.2);
  return {k.T_K >= 0.070 && k.T_K <= 0.140, "maximum curvature at " + fmt(k.T_K * 1e3) + " mK (x = " + fmt(k.x) + ")"};
}

Outcome universality() {
  const double B = 0.2;
  std::vector<SpinSpecies> family;
  for (double A : {100.0, 1475.4, 5000.0}) family.push_back({"I9/2", 0.5, 4.5, 2.0003, A});
  // Common temperatures where x <= 0.05 for every A.
  const double T_min = T_from_x(family.back(), 0.05);
  double worst = 0.0;
  for (int k = 0; k <= 40; ++k) {
    const double T = T_min * std::pow(10.0, k / 20.0);
    const double curie = magnetization_curie(2.0003, B, T).value;
    for (const auto& sp : family) worst = std::max(worst, std::abs(magnetization_exact(sp, B, T) / curie - 1.0));
  }
  return {worst <= 0.01, "A in {100, 1475.4, 5000} MHz, T >= " + fmt(T_min) + " K: max deviation from g muB B/2kBT " +
                             fmt(worst)};
}

Outcome fit_recovery() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto data = io::read_dataset_csv(io::read_file(data_path("synthetic_bi_e12.csv")), "synthetic_bi_e12.csv");
  FitModel full;
  full.basis = {{bismuth(), 0.2, false}, {bare_spin_half(), 0.2, false}};
  FitModel bi_only, e_only;
  bi_only.basis = {full.basis[0]};
  e_only.basis = {full.basis[1]};
  const auto cmp = compare_models(data, full, {{"Bi only", bi_only}, {"e12 only", e_only}});
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto& r = *cmp.full.ratio;
  const double z = std::abs(r.value - 0.873) / r.sigma;
  const bool ok = z <= 3.0 && cmp.reduced[0].rss_ratio >= 2.0 && cmp.reduced[1].rss_ratio >= 2.0 && s < 1.0;
  return {ok, "r = " + fmt(r.value) + " +/- " + fmt(r.sigma) + " (" + fmt(z) + " sigma from 0.873); RSS ratios Bi-only " +
                  fmt(cmp.reduced[0].rss_ratio) + ", e12-only " + fmt(cmp.reduced[1].rss_ratio) + "; " + fmt(s) + " s"};
}

Outcome qubit_transfer() {
  const QubitParams q{459.0, 1.91, 5.0, 1.0};
  const double f0 = qubit_frequency(q, 0.0);
  const double slope_err = std::abs(flux_slope(q) / 2.8648 - 1.0);
  const double h = 1e-4, d = 0.5;
  const double fd = (qubit_frequency(q, d + h) - qubit_frequency(q, d - h)) / (2.0 * h);
  const double deriv_err = std::abs(responsivity(q, d) / fd - 1.0);
  return {std::abs(f0 - 1.91) <= 1e-12 && slope_err <= 1e-3 && deriv_err <= 1e-6,
          "f(0) = " + fmt(f0) + " GHz; slope " + fmt(flux_slope(q)) + " GHz/mPhi0 (" + fmt(slope_err) +
              " from 2.8648); derivative vs finite difference " + fmt(deriv_err)};
}

Outcome figures_of_merit() {
  const auto cfg = io::run_config_from_json(io::load_json(data_path("reference_run.json")));
  const auto s = io::sensitivity_from_json(io::load_json(data_path("sensitivity_reference.json")));
  const auto rep = spin_sensitivity(cfg.qubit, s);
  const double volume = detection_volume(cfg.qubit);
  const double spins = s.detectable_spins.value_or(rep.min_detectable_spins);
  const double per_volume = volume_sensitivity(spins, volume);
  const double chain = volume_sensitivity(rep.min_detectable_spins, volume);
  return {rep.spins_per_rtHz == 12.0 && volume == 5.0 && per_volume == 2.0,
          fmt(rep.spins_per_rtHz) + " spins/rtHz, " + fmt(volume) + " um^3, " + fmt(spins) + " spins / " + fmt(volume) +
              " um^3 = " + fmt(per_volume) + " spins/um^3 (noise chain alone: " + fmt(chain) + " spins/um^3)"};
}

Outcome esr_count() {
  const auto lines = strong_lines(resonance_fields(bismuth(), 9.6), 0.1);
  double lo = 1e300, hi = 0.0;
  for (const auto& l : lines) {
    lo = std::min(lo, l.intensity);
    hi = std::max(hi, l.intensity);
  }
  const double spread = lines.empty() ? 0.0 : hi / lo;
  return {lines.size() == 10 && spread <= 2.0,
          std::to_string(lines.size()) + " strong lines at 9.6 GHz, intensity max/min " + fmt(spread)};
}

Outcome determinism() {
#ifndef DONORMAG_CLI
  return {false, "command-line tool was not built"};
#else
  std::ifstream cases(DONORMAG_GOLDEN_CASES);
  if (!cases) return {false, "cannot read " + std::string(DONORMAG_GOLDEN_CASES)};
  const fs::path work = DONORMAG_WORK_DIR;
  int count = 0;
  std::string line;
  while (std::getline(cases, line)) {
    if (line.empty() || line[0] == '#' || line.find('|') == std::string::npos) continue;
    const std::string name = trim(line.substr(0, line.find('|')));
    std::string args = trim(line.substr(line.find('|') + 1));
    for (std::size_t p; (p = args.find("@DATA@")) != std::string::npos;) args.replace(p, 6, DONORMAG_DATA_DIR);
    std::vector<fs::path> dirs{work / name / "a", work / name / "b"};
    for (const auto& dir : dirs) {
      fs::remove_all(dir);
      fs::create_directories(dir);
      const std::string cmd = std::string("\"") + DONORMAG_CLI + "\" " + args + " --out \"" + dir.string() + "\" > \"" +
                              (dir / "stdout.txt").string() + "\" 2>/dev/null";
      if (std::system(cmd.c_str()) != 0) return {false, name + ": command failed"};
    }
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(dirs[0])) files.push_back(e.path().filename().string());
    std::size_t other = std::distance(fs::directory_iterator(dirs[1]), fs::directory_iterator());
    if (files.size() != other) return {false, name + ": different file sets"};
    for (const auto& f : files) {
      if (io::read_file(dirs[0] / f) != io::read_file(dirs[1] / f)) return {false, name + ": " + f + " differs"};
    }
    ++count;
  }
  return {count > 0, std::to_string(count) + " CLI cases byte-identical across two runs"};
#endif
}

}  // namespace

int main() {
  criterion(1, "zero-field hyperfine splitting", zero_field_splitting);
  criterion(2, "Breit-Rabi oracle equivalence", oracle_equivalence);
  criterion(3, "zero-field degeneracy structure", degeneracy_structure);
  criterion(4, "limiting slopes of m versus x", limiting_slopes);
  criterion(5, "kink location", kink_location);
  criterion(6, "high-temperature universality", universality);
  criterion(7, "fit recovery on bundled synthetic data", fit_recovery);
  criterion(8, "qubit transfer function", qubit_transfer);
  criterion(9, "figures of merit", figures_of_merit);
  criterion(10, "ESR line count", esr_count);
  criterion(11, "CLI determinism", determinism);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
