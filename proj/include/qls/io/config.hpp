#pragma once

// Run configuration: JSON schema, tier presets and dotted-path overrides.
// Physical inputs arrive in lab units (nm, W/cm^2, cycles) and are
// converted to atomic units only through the accessors below.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "qls/model.hpp"
#include "qls/photon.hpp"
#include "qls/propagators.hpp"
#include "qls/spectra.hpp"

namespace qls {

struct GridConfig {
  double x_max = 100.0;
  int nx = 501;
};

struct AtomConfig {
  double softcore_a = 2.0;
};

struct PulseConfig {
  double wavelength_nm = 400.0;
  double intensity_wcm2 = 1e14;
  double ramp_up_cycles = 2.0;
  double flat_cycles = 4.0;
  double ramp_down_cycles = 2.0;
};

struct PhotonConfig {
  std::string kind = "squeezed_vacuum";  // squeezed_vacuum | coherent | fock
  double r = 0.8;
  double phi = 0.0;
  double alpha_re = 0.0;
  double alpha_im = 0.0;
  int n_fock = 0;
  FockBand band{0, 60};
  double truncation_tol = kDefaultTruncationTol;
};

struct SolverConfig {
  double dt = 0.1;
  double edge_threshold = 1e-8;
  bool mask = false;  // "off" | "cos8"
};

struct SpectrumConfig {
  double e_min = 0.0;
  double e_max = 2.5;
  int n_bins = 126;
  int window_order = 2;
  int n_bound_project = 8;
  double gamma = 0.0;  // 0: EnergyGrid default
};

struct EnsembleConfig {
  int n_radial = 50;
  int n_angular = 122;
  std::string mode = "quadrature";  // quadrature | mc
  std::uint64_t seed = 0;
  int n_samples = 4096;
  double rho_max = 0.0;        // 0: sqrt(n_max) + 6
  int identity_n_max = -1;     // -1: photon band n_max
  bool parity_saver = true;
  double screen_tol = 1e-12;
};

struct RunConfig {
  std::string tier = "ci-small";
  GridConfig grid;
  AtomConfig atom;
  PulseConfig pulse;
  PhotonConfig photon;
  SolverConfig solver;
  SpectrumConfig spectrum;
  EnsembleConfig ensemble;

  AtomModel atom_model() const;
  double omega() const;
  double e0() const;
  PhotonSpec photon_spec() const;
  // eps_v fixed by E0 = 2 eps_v * (sinh r | |alpha| | sqrt(n)).
  FieldParams field_params() const;
  PulseEnvelope envelope() const;
  Schedule schedule() const;
  EnergyGrid energy_grid() const;
  // Band on which the alpha quadrature must resolve the identity.
  FockBand identity_band() const;
};

inline const std::vector<std::string>& tier_names() {
  static const std::vector<std::string> names{"ci-small", "ci-bright", "desk", "paper"};
  return names;
}

// Preset values of a tier as a complete JSON document.
nlohmann::json tier_preset(const std::string& tier);

// Applies "a.b.c=value" to a JSON document; the value is parsed as JSON
// when possible, else taken as a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

// Validates against the schema (unknown keys and wrong types are config
// errors) and builds the typed config.
RunConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const RunConfig& cfg);

// Preset of doc["tier"] (or `tier` when given), overlaid by `doc`, then by
// the overrides, in that order.
RunConfig resolve_config(const nlohmann::json& doc, const std::string& tier,
                         const std::vector<std::string>& overrides);

RunConfig load_config(const std::string& path, const std::string& tier,
                      const std::vector<std::string>& overrides);

}  // namespace qls
