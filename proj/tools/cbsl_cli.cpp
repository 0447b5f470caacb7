#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "cbsl/validate.hpp"

using namespace cbsl;
using nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kNumerical = 2, kValidation = 3 };

struct RunConfig {
  std::optional<double> s0, delta;
  std::string channel = "hh";
  double kr = 100.0;
  bool allow_small_kr = false;
  int ntheta = 8, nphi = 16;
  double grid_w = 0.0;
  int grid_n = 2001;
  std::string medium, out;
  bool json = false;
  bool inject_fault = false;
};

std::string g6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

/// numbers go through the 6-digit text form so JSON and text agree byte for byte
double r6(double v) { return std::stod(g6(v)); }

cbs::CaseConfig case_config(const RunConfig& rc, double s0, double delta) {
  if (!(s0 > 0.0)) throw InvalidInput("s0 must be positive");
  if (rc.kr < 10.0 && !rc.allow_small_kr) throw InvalidInput("kr below 10 needs --allow-small-kr");
  cbs::CaseConfig c;
  c.s0 = s0;
  c.delta = delta;
  c.channel = rc.channel;
  c.kr = rc.kr;
  c.ntheta = rc.ntheta;
  c.nphi = rc.nphi;
  if (!rc.medium.empty()) c.medium = cbs::Medium::from_csv(rc.medium);
  return c;
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
  std::filesystem::path p = std::filesystem::path(dir) / name;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  std::ofstream o(p);
  if (!o) throw std::ios_base::failure("cannot write " + p.string());
  return o;
}

/// cases in a worker pool, results ordered by case index
std::vector<cbs::CBSResult> run_cases(const std::vector<cbs::CaseConfig>& cases) {
  const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<cbs::CBSResult> out(cases.size());
  for (std::size_t start = 0; start < cases.size(); start += workers) {
    std::vector<std::future<cbs::CBSResult>> batch;
    for (std::size_t k = start; k < std::min(cases.size(), start + workers); ++k)
      batch.push_back(std::async(std::launch::async, [&cases, k] { return cbs::run_case(cases[k]); }));
    for (std::size_t k = 0; k < batch.size(); ++k) out[start + k] = batch[k].get();
  }
  return out;
}

int cmd_table(const RunConfig& rc) {
  std::vector<cbs::CaseConfig> cases;
  std::vector<std::string> labels;
  if (rc.s0) {
    cases.push_back(case_config(rc, *rc.s0, rc.delta.value_or(0.0)));
    labels.push_back("-");
  } else {
    for (int k = 0; k < 4; ++k) {
      cases.push_back(case_config(rc, cbs::kReferenceTable[k].s0, rc.delta.value_or(cbs::kReferenceTable[k].delta)));
      labels.push_back(std::string(1, char('a' + k)));
    }
  }
  auto results = run_cases(cases);

  std::ostringstream text;
  ordered_json js = ordered_json::array();
  char line[256];
  std::snprintf(line, sizeof line, "%-4s %10s %10s %12s %12s %12s %12s %12s %12s %10s\n", "case", "s0", "delta", "L_el",
                "L_inel_tot", "L_tot", "C_el", "C_inel_tot", "C_tot", "eta");
  text << line;
  for (std::size_t k = 0; k < cases.size(); ++k) {
    const auto& c = cases[k];
    const auto row = cbs::table_row(results[k], c.s0, c.delta);
    std::snprintf(line, sizeof line, "%-4s %10s %10s %12s %12s %12s %12s %12s %12s %10s\n", labels[k].c_str(),
                  g6(c.s0).c_str(), g6(c.delta).c_str(), g6(row.L_el).c_str(), g6(row.L_inel_tot).c_str(),
                  g6(row.L_tot).c_str(), g6(row.C_el).c_str(), g6(row.C_inel_tot).c_str(), g6(row.C_tot).c_str(),
                  g6(row.eta).c_str());
    text << line;
    ordered_json j;
    j["case"] = labels[k];
    j["s0"] = r6(c.s0);
    j["delta"] = r6(c.delta);
    j["L_el"] = r6(row.L_el);
    j["L_inel_tot"] = r6(row.L_inel_tot);
    j["L_tot"] = r6(row.L_tot);
    j["C_el"] = r6(row.C_el);
    j["C_inel_tot"] = r6(row.C_inel_tot);
    j["C_tot"] = r6(row.C_tot);
    j["eta"] = r6(row.eta);
    j["warnings"] = results[k].warnings;
    js.push_back(j);
    for (const auto& w : results[k].warnings) std::cerr << "warning: " << w << "\n";
  }
  const std::string json_text = js.dump(2) + "\n";
  std::cout << (rc.json ? json_text : text.str());
  if (!rc.out.empty()) {
    open_out(rc.out, "table.txt") << text.str();
    open_out(rc.out, "table.json") << json_text;
  }
  return kOk;
}

int cmd_spectrum(const RunConfig& rc) {
  if (!rc.s0) throw InvalidInput("spectrum needs --s0");
  const double delta = rc.delta.value_or(0.0);
  cbs::CaseConfig c = case_config(rc, *rc.s0, delta);
  c.grid = cbs::default_grid(c.s0, delta, rc.grid_n, rc.grid_w);
  const auto r = cbs::run_case(c);
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
  const double norm = r.C_tot + r.L_tot;
  std::ostringstream csv;
  csv << "delta,ladder_inelastic,crossed_inelastic\n";
  ordered_json js;
  js["s0"] = r6(c.s0);
  js["delta"] = r6(delta);
  js["channel"] = c.channel;
  js["eta"] = r6(r.eta);
  js["normalization"] = r6(norm);
  js["grid"] = ordered_json::array();
  js["ladder_inelastic"] = ordered_json::array();
  js["crossed_inelastic"] = ordered_json::array();
  for (std::size_t k = 0; k < r.grid.size(); ++k) {
    const double l = r.ladder_inelastic[k] / norm, x = r.crossed_inelastic[k] / norm;
    csv << g6(r.grid[k]) << "," << g6(l) << "," << g6(x) << "\n";
    js["grid"].push_back(r6(r.grid[k]));
    js["ladder_inelastic"].push_back(r6(l));
    js["crossed_inelastic"].push_back(r6(x));
  }
  const std::string json_text = js.dump(2) + "\n";
  if (rc.out.empty()) {
    std::cout << (rc.json ? json_text : csv.str());
  } else {
    const std::string stem = "spectrum_s0_" + g6(c.s0) + "_delta_" + g6(delta);
    open_out(rc.out, stem + ".csv") << csv.str();
    if (rc.json) open_out(rc.out, stem + ".json") << json_text;
    std::cout << "eta " << g6(r.eta) << "\n";
  }
  return kOk;
}

int cmd_validate(const RunConfig& rc) {
  validate::Options o;
  o.ntheta = std::max(1, rc.ntheta / 2);
  o.nphi = std::max(1, rc.nphi / 2);
  if (rc.inject_fault) o.vacuum_weight = -1.0;
  bool ok = true;
  ordered_json js = ordered_json::array();
  for (const auto& c : validate::run_all(o)) {
    ok = ok && c.pass();
    if (rc.json) {
      js.push_back({{"check", c.name}, {"pass", c.pass()}, {"residual", c.residual}, {"tolerance", c.tolerance}});
    } else {
      std::printf("%s  %-44s residual %.3e  tol %.0e\n", c.pass() ? "PASS" : "FAIL", c.name.c_str(), c.residual,
                  c.tolerance);
      std::fflush(stdout);
    }
  }
  if (rc.json) std::cout << js.dump(2) << "\n";
  return ok ? kOk : kValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coherent backscattering of laser light by cold atoms"};
  app.set_config("--config", "", "INI file with key=value lines; flags override it");
  app.require_subcommand(1);
  RunConfig rc;
  double s0 = 0.0, delta = 0.0;
  auto* s0_opt = app.add_option("--s0", s0, "on-resonance saturation parameter");
  auto* delta_opt = app.add_option("--delta", delta, "laser detuning in units of Gamma");
  app.add_option("--channel", rc.channel, "hh, hperp, linpar or linperp")
      ->check(CLI::IsMember({"hh", "hperp", "linpar", "linperp"}));
  app.add_option("--kr", rc.kr, "atom separation kR");
  app.add_flag("--allow-small-kr", rc.allow_small_kr, "accept kR below 10");
  app.add_option("--ntheta", rc.ntheta, "Gauss-Legendre order in cos(theta)")->check(CLI::PositiveNumber);
  app.add_option("--nphi", rc.nphi, "uniform order in phi")->check(CLI::PositiveNumber);
  app.add_option("--grid-w", rc.grid_w, "half-width of the frequency grid (0: automatic)");
  app.add_option("--grid-n", rc.grid_n, "number of grid points (odd)");
  app.add_option("--medium", rc.medium, "CSV of delta, Re kl+, Im kl+");
  app.add_option("--out", rc.out, "output directory");
  app.add_flag("--json", rc.json, "emit JSON");
  app.add_flag("--inject-fault", rc.inject_fault, "flip the cross-noise sign (validate only)");

  auto* table = app.add_subcommand("table", "ladder and crossed totals per case");
  auto* spectrum = app.add_subcommand("spectrum", "inelastic ladder and crossed spectra");
  auto* check = app.add_subcommand("validate", "run the invariant suite");
  for (auto* sc : {table, spectrum, check}) sc->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  if (*s0_opt) rc.s0 = s0;
  if (*delta_opt) rc.delta = delta;

  try {
    if (*table) return cmd_table(rc);
    if (*spectrum) return cmd_spectrum(rc);
    return cmd_validate(rc);
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
}
