#include "qls/io/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qls/error.hpp"
#include "qls/parallel.hpp"

namespace qls {

using nlohmann::json;

namespace {

Container start(const Setup& s, const std::string& command) {
  Container c;
  c.config = config_to_json(s.cfg);
  c.metadata = {{"command", command},
                {"omega", s.fp.omega},
                {"eps_v", s.fp.eps_v},
                {"e0", s.cfg.e0()},
                {"dt", s.sched.dt},
                {"n_steps", s.sched.n_steps},
                {"t_end", s.sched.t_end()},
                {"ground_energy", s.ground.energy}};
  return c;
}

Eigen::VectorXd band_numbers(const FockBand& band) {
  return Eigen::VectorXd::LinSpaced(band.count(), band.n_min, band.n_max);
}

void add_spectra(Container& c, const EnergyGrid& egrid, const Eigen::MatrixXd& joint) {
  c.add("energies", egrid.energies());
  c.add("pes", Eigen::VectorXd(joint.rowwise().sum()));
  c.add("joint", joint);
}

void add_cutoffs(Container& c, const FieldParams& fp, const FockBand& band) {
  const CutoffLines lines = cutoff_lines(fp, band);
  c.add("cutoff_n", Eigen::VectorXd(lines.n.cast<double>()));
  c.add("cutoff_direct", lines.direct);
  c.add("cutoff_rescatter", lines.rescatter);
}

AlphaQuadrature make_quadrature(const Setup& s, bool qrep_only_ok) {
  const auto& e = s.cfg.ensemble;
  if (e.mode == "mc") {
    if (!qrep_only_ok)
      throw Error(ErrorKind::Config, "config", "ensemble.mode=mc is valid for the Q-representation only");
    return monte_carlo_quadrature(s.photon, e.n_samples, e.seed);
  }
  return build_alpha_quadrature(s.cfg.identity_band(), e.n_radial, e.n_angular, e.rho_max);
}

EnsembleOptions ensemble_options(const Setup& s, const RunOptions& opts) {
  EnsembleOptions eo;
  eo.parity_saver = s.cfg.ensemble.parity_saver;
  eo.screen_tol = s.cfg.ensemble.screen_tol;
  eo.threads = s.threads;
  eo.dispatch_order = opts.dispatch_order;
  eo.classical.mask = s.cfg.solver.mask;
  return eo;
}

void add_quadrature(Container& c, const AlphaQuadrature& q) {
  Eigen::VectorXcd alpha(static_cast<Eigen::Index>(q.size()));
  Eigen::VectorXd w(static_cast<Eigen::Index>(q.size()));
  for (std::size_t j = 0; j < q.size(); ++j) {
    alpha[static_cast<Eigen::Index>(j)] = q.nodes[j].alpha;
    w[static_cast<Eigen::Index>(j)] = q.nodes[j].weight;
  }
  c.add("nodes_alpha", alpha);
  c.add("nodes_weight", w);
}

void add_ensemble_diagnostics(Container& c, const EnsembleRun& run) {
  std::size_t screened = 0, mirrored = 0;
  for (auto st : run.status) {
    screened += st == NodeStatus::Screened;
    mirrored += st == NodeStatus::Mirrored;
  }
  c.diagnostics["nodes"] = run.quadrature.size();
  c.diagnostics["propagated"] = run.propagated_count();
  c.diagnostics["mirrored"] = mirrored;
  c.diagnostics["screened"] = screened;
  c.diagnostics["failed"] = run.failed.size();
  c.diagnostics["warnings"] = run.warnings;
}

double log_ratio_order(const std::vector<double>& h, const std::vector<double>& d) {
  double sum = 0.0;
  int count = 0;
  for (std::size_t k = 0; k + 1 < d.size(); ++k) {
    if (!(d[k] > 0.0) || !(d[k + 1] > 0.0) || h[k] == h[k + 1]) continue;
    sum += std::log(d[k] / d[k + 1]) / std::log(h[k] / h[k + 1]);
    ++count;
  }
  return count ? sum / count : std::nan("");
}

}  // namespace

Setup make_setup(const RunConfig& cfg, int threads) {
  AtomModel atom = cfg.atom_model();
  GroundState g = ground_state(atom);
  return Setup{cfg,
               atom,
               cfg.field_params(),
               cfg.envelope(),
               cfg.schedule(),
               cfg.photon_spec(),
               cfg.energy_grid(),
               std::move(g),
               threads > 0 ? threads : default_threads()};
}

Container run_ground_state(const Setup& s) {
  Container c = start(s, "ground-state");
  c.add("x", s.atom.grid.points());
  c.add("psi", Eigen::VectorXd(s.ground.state.psi.real()));
  c.add("potential", s.atom.potential());
  c.add_scalar("energy", s.ground.energy);
  const auto bound = bound_states(s.atom, s.cfg.spectrum.n_bound_project);
  Eigen::VectorXd levels(static_cast<Eigen::Index>(bound.size()));
  for (std::size_t k = 0; k < bound.size(); ++k) levels[static_cast<Eigen::Index>(k)] = bound[k].value;
  c.add("bound_energies", levels);
  return c;
}

Container run_full(const Setup& s, const RunOptions& opts) {
  const FockBand band = s.cfg.photon.band;
  const PhotonAmplitudes amps = photon_amplitudes(s.photon, band, s.cfg.photon.truncation_tol);
  JointState st = init_joint_state(s.ground.state, amps);
  Container c = start(s, "run-full");
  c.add("photon_dist_initial", photon_distribution(st));

  Schedule sched = s.sched;
  sched.record_every = opts.record_every;
  Diagnostics diag;
  FullqOptions fo;
  fo.edge_threshold = s.cfg.solver.edge_threshold;
  fo.mask = s.cfg.solver.mask;
  fo.threads = s.threads;
  const double n0 = st.norm();
  const ParityMasses p0 = parity_sectors(st);
  st = propagate_fullq(std::move(st), s.atom, s.fp, s.env, sched, &diag, fo);

  add_spectra(c, s.egrid, joint_spectrum(st, s.atom, s.egrid, s.cfg.spectrum.n_bound_project, s.threads));
  c.add("photon_dist", photon_distribution(st));
  c.add("n", band_numbers(band));
  add_cutoffs(c, s.fp, band);

  const auto nr = static_cast<Eigen::Index>(diag.records.size());
  Eigen::VectorXd t(nr), norm(nr), edge(nr), leak(nr);
  for (Eigen::Index k = 0; k < nr; ++k) {
    const auto& r = diag.records[static_cast<std::size_t>(k)];
    t[k] = r.time;
    norm[k] = r.norm;
    edge[k] = r.edge_occupation;
    leak[k] = r.parity_leakage;
  }
  c.add("diag_time", t);
  c.add("diag_norm", norm);
  c.add("diag_edge_occupation", edge);
  c.add("diag_parity_leakage", leak);
  c.diagnostics = {{"initial_norm", n0},
                   {"initial_parity_even", p0.even},
                   {"initial_parity_odd", p0.odd},
                   {"truncation_mass", amps.truncation_mass},
                   {"max_norm_drift", diag.max_norm_drift},
                   {"max_parity_leakage", diag.max_parity_leakage},
                   {"max_edge_occupation", diag.max_edge_occupation},
                   {"warnings", diag.warnings}};
  return c;
}

EnsembleResult run_qrep(const Setup& s, const RunOptions& opts) {
  const FockBand band = s.cfg.photon.band;
  const AlphaQuadrature quad = make_quadrature(s, true);
  SpectrumEngine engine(s.atom, s.egrid, s.cfg.spectrum.n_bound_project);
  EnsembleOptions eo = ensemble_options(s, opts);
  eo.spectra = &engine;
  eo.keep_states = false;

  Container c = start(s, "run-qrep");
  c.add("photon_dist_initial", qrep_photon_dist(s.photon, quad, band));
  EnsembleRun run = run_ensemble(s.ground.state, s.atom, s.fp, s.env, s.sched, s.photon, quad, eo);
  const Eigen::VectorXd total = qrep_total_pes(run);
  c.add("energies", s.egrid.energies());
  c.add("pes", total);
  c.add("joint", qrep_joint(run, band));
  c.add("photon_dist", qrep_photon_dist(run, band));
  c.add("n", band_numbers(band));
  add_cutoffs(c, s.fp, band);
  add_quadrature(c, run.quadrature);
  add_ensemble_diagnostics(c, run);
  c.metadata["quadrature"] = s.cfg.ensemble.mode;

  EnsembleResult out{std::move(c), {}};
  if (opts.keep_ensemble) out.run = std::move(run);
  return out;
}

EnsembleResult run_rrep(const Setup& s, const RunOptions& opts) {
  const FockBand band = s.cfg.photon.band;
  const AlphaQuadrature quad = make_quadrature(s, false);
  EnsembleOptions eo = ensemble_options(s, opts);

  Container c = start(s, "run-rrep");
  EnsembleRun run = run_ensemble(s.ground.state, s.atom, s.fp, s.env, s.sched, s.photon, quad, eo);
  add_spectra(c, s.egrid,
              rrep_joint_spectrum(run, s.atom, s.egrid, band, s.cfg.spectrum.n_bound_project, s.threads));
  c.add("photon_dist", rrep_photon_dist(run, band));
  c.add("n", band_numbers(band));
  add_cutoffs(c, s.fp, band);
  add_quadrature(c, run.quadrature);
  add_ensemble_diagnostics(c, run);

  EnsembleResult out{std::move(c), {}};
  if (opts.keep_ensemble) out.run = std::move(run);
  return out;
}

cplx equivalent_alpha(const PhotonSpec& photon) {
  switch (photon.kind) {
    case PhotonKind::Coherent:
      return photon.alpha;
    case PhotonKind::Fock:
      return {std::sqrt(static_cast<double>(photon.n_fock)), 0.0};
    case PhotonKind::SqueezedVacuum:
      break;
  }
  return {std::sinh(photon.r), 0.0};
}

Container run_spectrum(const Setup& s) {
  const cplx alpha = equivalent_alpha(s.photon);
  ClassicalOptions co;
  co.mask = s.cfg.solver.mask;
  Diagnostics diag;
  const ElectronState out =
      propagate_classical(s.ground.state, s.atom, alpha, s.fp, s.env, s.sched, &diag, co);
  Container c = start(s, "spectrum");
  c.metadata["alpha_re"] = alpha.real();
  c.metadata["alpha_im"] = alpha.imag();
  c.add("energies", s.egrid.energies());
  c.add("pes", pes(out, s.atom, s.egrid, s.cfg.spectrum.n_bound_project));
  c.add("psi", out.psi);
  c.diagnostics = {{"final_norm", out.norm()}, {"warnings", diag.warnings}};
  return c;
}

Container run_photon_dist(const Setup& s) {
  const FockBand band = s.cfg.photon.band;
  const PhotonAmplitudes amps = photon_amplitudes(s.photon, band, s.cfg.photon.truncation_tol);
  Container c = start(s, "photon-dist");
  c.add("n", band_numbers(band));
  c.add("photon_dist", amps.probabilities());
  c.add("amplitudes", amps.coeffs);
  c.add("qrep_photon_dist", qrep_photon_dist(s.photon, make_quadrature(s, true), band));
  c.diagnostics = {{"truncation_mass", amps.truncation_mass}};
  return c;
}

Container run_quadrature_check(const Setup& s) {
  const auto& e = s.cfg.ensemble;
  const FockBand band = s.cfg.identity_band();
  const int need = min_angular_nodes(band);
  if (e.n_angular < need) {
    // Report the aliasing error anyway: it names the offending (m, n).
    const AlphaQuadrature q = polar_quadrature(e.n_radial, e.n_angular,
                                               e.rho_max > 0 ? e.rho_max : default_rho_max(band));
    const IdentityCheck chk = check_identity(q, band);
    std::ostringstream msg;
    msg << "n_angular = " << e.n_angular << " < " << need
        << " aliases the identity: max error " << chk.max_error << " at (m,n) = ("
        << chk.worst_m << "," << chk.worst_n << ")";
    throw Error(ErrorKind::Numerical, "quadrature-insufficient", msg.str());
  }
  const AlphaQuadrature q = build_alpha_quadrature(band, e.n_radial, e.n_angular, e.rho_max);
  const IdentityCheck chk = check_identity(q, band);
  Container c = start(s, "quadrature-check");
  c.add_scalar("identity_error", chk.max_error);
  c.diagnostics = {{"max_error", chk.max_error}, {"worst_m", chk.worst_m}, {"worst_n", chk.worst_n},
                   {"n_max", band.n_max}, {"nodes", q.size()}};
  return c;
}

Container run_converge(const RunConfig& cfg, const std::string& axis,
                       const std::vector<double>& levels, int threads) {
  if (levels.size() < 3) throw Error(ErrorKind::Config, "config", "converge needs at least 3 levels");
  std::vector<double> observable;   // scalar per level
  std::vector<double> deltas;       // between successive levels
  std::vector<Eigen::VectorXcd> states;
  std::vector<Eigen::VectorXd> spectra;
  Setup base = make_setup(cfg, threads);

  for (double level : levels) {
    RunConfig c = cfg;
    if (axis == "dt") {
      c.solver.dt = level;
      Setup s = make_setup(c, threads);
      const ElectronState out = propagate_classical(s.ground.state, s.atom, equivalent_alpha(s.photon),
                                                    s.fp, s.env, s.sched);
      observable.push_back(out.norm());
      states.push_back(out.psi);
      if (std::abs(s.sched.t_end() - base.sched.t_end()) > 1e-9)
        throw invalid_parameter("dt level does not tile the pulse");
    } else if (axis == "nx") {
      c.grid.nx = static_cast<int>(level);
      Setup s = make_setup(c, threads);
      const ElectronState out = propagate_classical(s.ground.state, s.atom, equivalent_alpha(s.photon),
                                                    s.fp, s.env, s.sched);
      spectra.push_back(pes(out, s.atom, s.egrid, c.spectrum.n_bound_project));
      observable.push_back(spectra.back().sum());
    } else if (axis == "band") {
      c.photon.band.n_max = static_cast<int>(level);
      c.solver.edge_threshold = 1.0;  // measuring the overflow, not gating on it
      Setup s = make_setup(c, threads);
      const PhotonAmplitudes amps = photon_amplitudes(s.photon, c.photon.band, c.photon.truncation_tol);
      Diagnostics diag;
      FullqOptions fo;
      fo.throw_on_edge = false;
      fo.edge_threshold = 1.0;
      fo.mask = c.solver.mask;
      fo.threads = s.threads;
      propagate_fullq(init_joint_state(s.ground.state, amps), s.atom, s.fp, s.env, s.sched, &diag, fo);
      observable.push_back(diag.max_edge_occupation);
    } else if (axis == "quadrature") {
      const FockBand band = cfg.identity_band();
      const double rho = cfg.ensemble.rho_max > 0 ? cfg.ensemble.rho_max : default_rho_max(band);
      observable.push_back(
          check_identity(polar_quadrature(cfg.ensemble.n_radial, static_cast<int>(level), rho), band).max_error);
    } else {
      throw Error(ErrorKind::Config, "config", "unknown converge axis '" + axis + "' (dt | nx | band | quadrature)");
    }
  }

  if (axis == "dt") {
    for (std::size_t k = 0; k + 1 < states.size(); ++k)
      deltas.push_back((states[k] - states[k + 1]).norm() * std::sqrt(base.atom.grid.dx()));
  } else if (axis == "nx") {
    for (std::size_t k = 0; k + 1 < spectra.size(); ++k)
      deltas.push_back(normalized_l1(spectra[k].array(), spectra[k + 1].array()));
  } else {
    deltas = observable;  // band and quadrature observables are errors themselves
  }

  Container out;
  out.config = config_to_json(cfg);
  out.metadata = {{"command", "converge"}, {"axis", axis}};
  auto vec = [](const std::vector<double>& v) {
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
  };
  out.add("levels", vec(levels));
  out.add("observable", vec(observable));
  out.add("deltas", vec(deltas));

  std::vector<std::string> warnings;
  for (std::size_t k = 0; k + 1 < deltas.size(); ++k)
    if (!(deltas[k + 1] <= deltas[k])) {
      std::ostringstream msg;
      msg << "non-monotone deltas at level " << k + 1 << ": " << deltas[k] << " -> " << deltas[k + 1];
      warnings.push_back(msg.str());
    }
  double order = std::nan("");
  if (axis == "dt" || axis == "nx") {
    std::vector<double> h(levels);
    if (axis == "nx")
      for (auto& v : h) v = 2.0 * cfg.grid.x_max / (v - 1.0);  // grid spacing
    // delta k spans levels k and k+1; its step is the coarser of the two
    order = log_ratio_order(std::vector<double>(h.begin(), h.end() - 1), deltas);
  }
  out.add_scalar("order", order);
  out.diagnostics = {{"warnings", warnings}, {"order", std::isnan(order) ? json(nullptr) : json(order)}};
  return out;
}

}  // namespace qls
