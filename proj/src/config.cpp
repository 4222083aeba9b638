#include "qls/io/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "qls/error.hpp"

namespace qls {

using nlohmann::json;

namespace {

Error config_error(const std::string& what) { return Error(ErrorKind::Config, "config", what); }

double intensity_for_field(double e0) { return e0 * e0 * units::intensity_au; }

json base_document() { return config_to_json(RunConfig{}); }

void check_keys(const json& doc, const json& schema, const std::string& path) {
  if (!doc.is_object()) throw config_error("'" + path + "' must be an object");
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!schema.contains(it.key())) throw config_error("unknown key '" + key + "'");
    const json& ref = schema[it.key()];
    if (ref.is_object()) check_keys(it.value(), ref, key);
  }
}

template <typename T>
T get(const json& doc, const char* section, const char* key) {
  const json& v = doc.at(section).at(key);
  const std::string where = std::string(section) + "." + key;
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw config_error("'" + where + "' must be a boolean");
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) throw config_error("'" + where + "' must be a string");
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw config_error("'" + where + "' must be an integer");
  } else {
    if (!v.is_number()) throw config_error("'" + where + "' must be a number");
  }
  return v.get<T>();
}

}  // namespace

json tier_preset(const std::string& tier) {
  json doc = base_document();
  doc["tier"] = tier;
  if (tier == "ci-small") {
    // omega = 0.8 a.u. lies above I_p: single-photon ionization.
    doc["pulse"]["wavelength_nm"] = omega_to_wavelength(0.8);
    doc["pulse"]["intensity_wcm2"] = intensity_for_field(0.05);
    return doc;
  }
  if (tier == "ci-bright") {
    doc["pulse"]["wavelength_nm"] = omega_to_wavelength(0.8);
    doc["pulse"]["intensity_wcm2"] = intensity_for_field(0.025);
    doc["photon"]["r"] = 2.8;
    doc["photon"]["band"] = {{"n_min", 0}, {"n_max", 1900}};
    doc["photon"]["truncation_tol"] = 1e-6;
    doc["ensemble"]["n_radial"] = 120;
    doc["ensemble"]["n_angular"] = 240;
    doc["ensemble"]["rho_max"] = 50.0;
    doc["ensemble"]["identity_n_max"] = 40;
    return doc;
  }
  if (tier == "desk") {
    doc["grid"] = {{"x_max", 200.0}, {"nx", 1335}};
    doc["pulse"] = {{"wavelength_nm", 400.0}, {"intensity_wcm2", 1e14},
                    {"ramp_up_cycles", 1.0}, {"flat_cycles", 2.0}, {"ramp_down_cycles", 1.0}};
    doc["photon"]["r"] = 3.0;
    doc["photon"]["band"] = {{"n_min", 0}, {"n_max", 2700}};
    doc["photon"]["truncation_tol"] = 1e-6;
    doc["solver"]["mask"] = "cos8";
    doc["spectrum"] = {{"e_min", 0.0}, {"e_max", 0.8}, {"n_bins", 161}, {"window_order", 2},
                       {"n_bound_project", 8}, {"gamma", 0.0}};
    doc["ensemble"]["n_radial"] = 60;
    doc["ensemble"]["n_angular"] = 160;
    doc["ensemble"]["rho_max"] = 50.0;
    doc["ensemble"]["identity_n_max"] = 30;
    return doc;
  }
  if (tier == "paper") {
    // Documented production scale; far beyond a single workstation.
    doc["grid"] = {{"x_max", 400.0}, {"nx", 4097}};
    doc["pulse"] = {{"wavelength_nm", 400.0}, {"intensity_wcm2", 1e14},
                    {"ramp_up_cycles", 2.0}, {"flat_cycles", 6.0}, {"ramp_down_cycles", 2.0}};
    doc["photon"]["r"] = 5.3;
    doc["photon"]["band"] = {{"n_min", 0}, {"n_max", 200000}};
    doc["photon"]["truncation_tol"] = 1e-6;
    doc["solver"]["dt"] = 0.05;
    doc["solver"]["mask"] = "cos8";
    doc["spectrum"] = {{"e_min", 0.0}, {"e_max", 0.8}, {"n_bins", 321}, {"window_order", 2},
                       {"n_bound_project", 8}, {"gamma", 0.0}};
    doc["ensemble"]["n_radial"] = 400;
    doc["ensemble"]["n_angular"] = 1024;
    doc["ensemble"]["rho_max"] = 700.0;
    doc["ensemble"]["identity_n_max"] = 200;
    return doc;
  }
  throw config_error("unknown tier '" + tier + "' (ci-small | ci-bright | desk | paper)");
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw config_error("override '" + assignment + "' is not key=value");
  const std::string path = assignment.substr(0, eq), text = assignment.substr(eq + 1);
  if (path == "tier") throw config_error("select tiers with --tier, not --set");
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json* node = &doc;
  std::stringstream ss(path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (parts[i].empty()) throw config_error("bad override path '" + path + "'");
    node = &(*node)[parts[i]];
    if (!node->is_object() && !node->is_null()) throw config_error("'" + path + "' descends into a value");
  }
  (*node)[parts.back()] = value;
}

RunConfig config_from_json(const json& doc) {
  check_keys(doc, base_document(), "");
  RunConfig c;
  if (doc.contains("tier")) {
    if (!doc["tier"].is_string()) throw config_error("'tier' must be a string");
    c.tier = doc["tier"].get<std::string>();
  }
  json full = base_document();
  full.merge_patch(doc);

  c.grid.x_max = get<double>(full, "grid", "x_max");
  c.grid.nx = get<int>(full, "grid", "nx");
  c.atom.softcore_a = get<double>(full, "atom", "softcore_a");
  c.pulse.wavelength_nm = get<double>(full, "pulse", "wavelength_nm");
  c.pulse.intensity_wcm2 = get<double>(full, "pulse", "intensity_wcm2");
  c.pulse.ramp_up_cycles = get<double>(full, "pulse", "ramp_up_cycles");
  c.pulse.flat_cycles = get<double>(full, "pulse", "flat_cycles");
  c.pulse.ramp_down_cycles = get<double>(full, "pulse", "ramp_down_cycles");
  c.photon.kind = get<std::string>(full, "photon", "kind");
  c.photon.r = get<double>(full, "photon", "r");
  c.photon.phi = get<double>(full, "photon", "phi");
  c.photon.alpha_re = get<double>(full, "photon", "alpha_re");
  c.photon.alpha_im = get<double>(full, "photon", "alpha_im");
  c.photon.n_fock = get<int>(full, "photon", "n_fock");
  c.photon.truncation_tol = get<double>(full, "photon", "truncation_tol");
  const json& band = full["photon"]["band"];
  if (!band["n_min"].is_number_integer() || !band["n_max"].is_number_integer())
    throw config_error("'photon.band' bounds must be integers");
  c.photon.band = FockBand(band["n_min"].get<int>(), band["n_max"].get<int>());
  c.solver.dt = get<double>(full, "solver", "dt");
  c.solver.edge_threshold = get<double>(full, "solver", "edge_threshold");
  const auto mask = get<std::string>(full, "solver", "mask");
  if (mask != "off" && mask != "cos8") throw config_error("'solver.mask' must be off or cos8");
  c.solver.mask = mask == "cos8";
  c.spectrum.e_min = get<double>(full, "spectrum", "e_min");
  c.spectrum.e_max = get<double>(full, "spectrum", "e_max");
  c.spectrum.n_bins = get<int>(full, "spectrum", "n_bins");
  c.spectrum.window_order = get<int>(full, "spectrum", "window_order");
  c.spectrum.n_bound_project = get<int>(full, "spectrum", "n_bound_project");
  c.spectrum.gamma = get<double>(full, "spectrum", "gamma");
  c.ensemble.n_radial = get<int>(full, "ensemble", "n_radial");
  c.ensemble.n_angular = get<int>(full, "ensemble", "n_angular");
  c.ensemble.mode = get<std::string>(full, "ensemble", "mode");
  c.ensemble.seed = get<std::uint64_t>(full, "ensemble", "seed");
  c.ensemble.n_samples = get<int>(full, "ensemble", "n_samples");
  c.ensemble.rho_max = get<double>(full, "ensemble", "rho_max");
  c.ensemble.identity_n_max = get<int>(full, "ensemble", "identity_n_max");
  c.ensemble.parity_saver = get<bool>(full, "ensemble", "parity_saver");
  c.ensemble.screen_tol = get<double>(full, "ensemble", "screen_tol");

  if (c.photon.kind != "squeezed_vacuum" && c.photon.kind != "coherent" && c.photon.kind != "fock")
    throw config_error("'photon.kind' must be squeezed_vacuum, coherent or fock");
  if (c.ensemble.mode != "quadrature" && c.ensemble.mode != "mc")
    throw config_error("'ensemble.mode' must be quadrature or mc");
  if (c.grid.nx < 3 || c.grid.nx % 2 == 0) throw config_error("'grid.nx' must be odd and >= 3");
  if (!(c.grid.x_max > 0.0)) throw config_error("'grid.x_max' must be positive");
  if (!(c.solver.dt > 0.0)) throw config_error("'solver.dt' must be positive");
  if (c.spectrum.n_bins < 1) throw config_error("'spectrum.n_bins' must be >= 1");
  return c;
}

json config_to_json(const RunConfig& c) {
  json j;
  j["tier"] = c.tier;
  j["grid"] = {{"x_max", c.grid.x_max}, {"nx", c.grid.nx}};
  j["atom"] = {{"softcore_a", c.atom.softcore_a}};
  j["pulse"] = {{"wavelength_nm", c.pulse.wavelength_nm},
                {"intensity_wcm2", c.pulse.intensity_wcm2},
                {"ramp_up_cycles", c.pulse.ramp_up_cycles},
                {"flat_cycles", c.pulse.flat_cycles},
                {"ramp_down_cycles", c.pulse.ramp_down_cycles}};
  j["photon"] = {{"kind", c.photon.kind},
                 {"r", c.photon.r},
                 {"phi", c.photon.phi},
                 {"alpha_re", c.photon.alpha_re},
                 {"alpha_im", c.photon.alpha_im},
                 {"n_fock", c.photon.n_fock},
                 {"band", {{"n_min", c.photon.band.n_min}, {"n_max", c.photon.band.n_max}}},
                 {"truncation_tol", c.photon.truncation_tol}};
  j["solver"] = {{"dt", c.solver.dt},
                 {"edge_threshold", c.solver.edge_threshold},
                 {"mask", c.solver.mask ? "cos8" : "off"}};
  j["spectrum"] = {{"e_min", c.spectrum.e_min},
                   {"e_max", c.spectrum.e_max},
                   {"n_bins", c.spectrum.n_bins},
                   {"window_order", c.spectrum.window_order},
                   {"n_bound_project", c.spectrum.n_bound_project},
                   {"gamma", c.spectrum.gamma}};
  j["ensemble"] = {{"n_radial", c.ensemble.n_radial},
                   {"n_angular", c.ensemble.n_angular},
                   {"mode", c.ensemble.mode},
                   {"seed", c.ensemble.seed},
                   {"n_samples", c.ensemble.n_samples},
                   {"rho_max", c.ensemble.rho_max},
                   {"identity_n_max", c.ensemble.identity_n_max},
                   {"parity_saver", c.ensemble.parity_saver},
                   {"screen_tol", c.ensemble.screen_tol}};
  return j;
}

RunConfig resolve_config(const json& doc, const std::string& tier,
                         const std::vector<std::string>& overrides) {
  std::string name = tier;
  if (name.empty()) {
    if (doc.is_object() && doc.contains("tier") && doc["tier"].is_string())
      name = doc["tier"].get<std::string>();
    else
      name = "ci-small";
  }
  json merged = tier_preset(name);
  if (doc.is_object()) {
    check_keys(doc, merged, "");
    json patch = doc;
    patch.erase("tier");
    merged.merge_patch(patch);
  } else if (!doc.is_null()) {
    throw config_error("configuration must be a JSON object");
  }
  for (const auto& o : overrides) apply_override(merged, o);
  merged["tier"] = name;
  return config_from_json(merged);
}

RunConfig load_config(const std::string& path, const std::string& tier,
                      const std::vector<std::string>& overrides) {
  json doc;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "io", "cannot read config '" + path + "'");
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw config_error("config '" + path + "' is not valid JSON: " + e.what());
    }
  }
  return resolve_config(doc, tier, overrides);
}

// ---------------------------------------------------------------------------

AtomModel RunConfig::atom_model() const {
  return AtomModel(SpaceGrid(grid.x_max, grid.nx), atom.softcore_a);
}

double RunConfig::omega() const { return wavelength_to_omega(pulse.wavelength_nm); }

double RunConfig::e0() const { return intensity_to_field(pulse.intensity_wcm2); }

PhotonSpec RunConfig::photon_spec() const {
  if (photon.kind == "coherent") return PhotonSpec::coherent({photon.alpha_re, photon.alpha_im});
  if (photon.kind == "fock") return PhotonSpec::fock(photon.n_fock);
  return PhotonSpec::squeezed_vacuum(photon.r, photon.phi);
}

FieldParams RunConfig::field_params() const {
  if (photon.kind == "coherent") {
    const double a = std::hypot(photon.alpha_re, photon.alpha_im);
    if (!(a > 0.0)) throw invalid_parameter("coherent drive needs |alpha| > 0 to fix eps_v");
    return FieldParams(omega(), e0() / (2.0 * a));
  }
  if (photon.kind == "fock") {
    if (photon.n_fock <= 0) throw invalid_parameter("Fock drive needs n_fock > 0 to fix eps_v");
    return FieldParams(omega(), e0() / (2.0 * std::sqrt(double(photon.n_fock))));
  }
  return derive_field_params(e0(), photon.r, omega());
}

PulseEnvelope RunConfig::envelope() const {
  return PulseEnvelope(pulse.ramp_up_cycles, pulse.flat_cycles, pulse.ramp_down_cycles, omega());
}

Schedule RunConfig::schedule() const { return Schedule::covering(envelope(), solver.dt); }

EnergyGrid RunConfig::energy_grid() const {
  return EnergyGrid(spectrum.e_min, spectrum.e_max, spectrum.n_bins, spectrum.gamma,
                    spectrum.window_order);
}

FockBand RunConfig::identity_band() const {
  const int hi = ensemble.identity_n_max < 0 ? photon.band.n_max
                                              : std::min(ensemble.identity_n_max, photon.band.n_max);
  return FockBand(0, hi);
}

}  // namespace qls
