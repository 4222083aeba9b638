#include "qls/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>

#include "qls/error.hpp"
#include "qls/parallel.hpp"

namespace qls {

namespace {

constexpr std::size_t kMaxNodeWarnings = 8;
constexpr Eigen::Index kNodeBlock = 256;

int resolve_threads(int threads) { return threads > 0 ? threads : default_threads(); }

Eigen::VectorXcd reversed(const Eigen::VectorXcd& v) { return v.reverse(); }

void require_states(const EnsembleRun& run) {
  if (!run.complete())
    throw invalid_parameter("coherent sum needs a complete ensemble (" +
                            std::to_string(run.failed.size()) + " nodes failed)");
  if (!run.has_states())
    throw invalid_parameter("ensemble was run without retained states");
}

// |<n|alpha>|^2 for the band, as a real vector.
Eigen::VectorXd poisson_column(cplx alpha, const FockBand& band) {
  return coherent_overlaps(alpha, band).cwiseAbs2();
}

}  // namespace

std::size_t EnsembleRun::propagated_count() const {
  return static_cast<std::size_t>(
      std::count(status.begin(), status.end(), NodeStatus::Propagated));
}

Eigen::VectorXcd EnsembleRun::final_state(std::size_t j) const {
  switch (status.at(j)) {
    case NodeStatus::Propagated:
      if (states.cols() == 0) throw invalid_parameter("ensemble states were not retained");
      return states.col(slot[j]);
    case NodeStatus::Mirrored:
      return reversed(final_state(static_cast<std::size_t>(slot[j])));
    case NodeStatus::Failed:
      throw invalid_parameter("node " + std::to_string(j) + " failed");
    case NodeStatus::Screened:
      break;
  }
  return Eigen::VectorXcd::Zero(grid.size());
}

double EnsembleRun::incoherent_weight(std::size_t j) const {
  return quadrature.nodes[j].weight * std::norm(overlaps[static_cast<Eigen::Index>(j)]);
}

EnsembleRun run_ensemble(const ElectronState& psi0, const AtomModel& atom, const FieldParams& fp,
                         const PulseEnvelope& env, const Schedule& sched, const PhotonSpec& photon,
                         const AlphaQuadrature& quad, const EnsembleOptions& opts) {
  if (!(psi0.grid == atom.grid)) throw invalid_parameter("initial state grid differs from the atom grid");
  if (!opts.keep_states && opts.spectra == nullptr)
    throw invalid_parameter("memory-saving mode needs a spectrum engine");

  const std::size_t n = quad.size();
  EnsembleRun run;
  run.quadrature = quad;
  run.photon = photon;
  run.grid = atom.grid;
  run.overlaps.resize(static_cast<Eigen::Index>(n));
  run.status.assign(n, NodeStatus::Screened);
  run.slot.assign(n, -1);

  for (std::size_t j = 0; j < n; ++j) run.overlaps[j] = photon.overlap(quad.nodes[j].alpha);
  auto active = [&](std::size_t j) { return std::abs(run.overlaps[j]) >= opts.screen_tol; };

  // Slots are assigned in node order, so the layout does not depend on
  // dispatch order or thread count.
  std::vector<std::size_t> tasks;
  for (std::size_t j = 0; j < n; ++j) {
    if (run.status[j] == NodeStatus::Mirrored) continue;
    const long m = opts.parity_saver ? quad.mirror_of(j) : -1;
    const bool pair = m > static_cast<long>(j);
    const bool partner_active = pair && active(static_cast<std::size_t>(m));
    if (!active(j) && !partner_active) continue;
    run.status[j] = NodeStatus::Propagated;
    run.slot[j] = static_cast<long>(tasks.size());
    tasks.push_back(j);
    if (partner_active) {
      run.status[m] = NodeStatus::Mirrored;
      run.slot[m] = static_cast<long>(j);
    }
  }

  std::vector<std::size_t> order(tasks.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (!opts.dispatch_order.empty()) {
    if (opts.dispatch_order.size() != tasks.size())
      throw invalid_parameter("dispatch order has " + std::to_string(opts.dispatch_order.size()) +
                              " entries for " + std::to_string(tasks.size()) + " tasks");
    std::vector<char> seen(tasks.size(), 0);
    for (std::size_t k : opts.dispatch_order) {
      if (k >= tasks.size() || seen[k]) throw invalid_parameter("dispatch order is not a permutation");
      seen[k] = 1;
    }
    order = opts.dispatch_order;
  }

  const Eigen::Index nx = atom.grid.size();
  if (opts.keep_states) run.states.resize(nx, static_cast<Eigen::Index>(tasks.size()));
  const int n_bins = opts.spectra ? opts.spectra->grid().size() : 0;
  if (opts.spectra) run.node_pes = Eigen::MatrixXd::Zero(n_bins, static_cast<Eigen::Index>(n));

  std::vector<char> failed(tasks.size(), 0);
  std::vector<std::string> task_warning(tasks.size());
  const int threads = std::max<int>(1, std::min<int>(resolve_threads(opts.threads),
                                                     static_cast<int>(std::max<std::size_t>(tasks.size(), 1))));

  // One propagator (with its scratch buffers) per worker chunk.
  parallel_for(static_cast<std::size_t>(threads), threads, [&](std::size_t w) {
    const std::size_t lo = order.size() * w / threads, hi = order.size() * (w + 1) / threads;
    ClassicalPropagator prop(atom, fp, env, opts.classical);
    for (std::size_t k = lo; k < hi; ++k) {
      const std::size_t t = order[k];
      const std::size_t j = tasks[t];
      try {
        Diagnostics diag;
        ElectronState out = prop.propagate(psi0, quad.nodes[j].alpha, sched, &diag);
        if (!out.psi.allFinite()) throw numerical_error("numerical-blowup", "non-finite node state");
        if (!diag.warnings.empty()) task_warning[t] = diag.warnings.front();
        if (opts.spectra) {
          run.node_pes.col(static_cast<Eigen::Index>(j)) = opts.spectra->pes(out.psi);
          const long m = opts.parity_saver ? quad.mirror_of(j) : -1;
          if (m >= 0 && run.status[m] == NodeStatus::Mirrored)
            run.node_pes.col(m) = opts.spectra->pes(out.psi.reverse());
        }
        if (opts.keep_states) run.states.col(static_cast<Eigen::Index>(t)) = out.psi;
      } catch (const std::exception& e) {
        failed[t] = 1;
        task_warning[t] = std::string("node failed: ") + e.what();
      }
    }
  });

  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const std::size_t j = tasks[t];
    if (failed[t]) {
      run.status[j] = NodeStatus::Failed;
      run.failed.push_back(j);
      const long m = opts.parity_saver ? quad.mirror_of(j) : -1;
      if (m >= 0 && run.status[m] == NodeStatus::Mirrored) {
        run.status[m] = NodeStatus::Failed;
        run.failed.push_back(static_cast<std::size_t>(m));
      }
    }
    if (!task_warning[t].empty() && run.warnings.size() < kMaxNodeWarnings)
      run.warnings.push_back("node " + std::to_string(j) + ": " + task_warning[t]);
  }
  std::sort(run.failed.begin(), run.failed.end());
  if (!run.failed.empty() && !opts.allow_partial)
    throw numerical_error("ensemble-incomplete", std::to_string(run.failed.size()) + " of " +
                                                     std::to_string(n) + " nodes failed");
  return run;
}

void attach_node_spectra(EnsembleRun& run, const SpectrumEngine& engine, int threads) {
  if (!run.has_states()) throw invalid_parameter("ensemble was run without retained states");
  const std::size_t n = run.quadrature.size();
  run.node_pes = Eigen::MatrixXd::Zero(engine.grid().size(), static_cast<Eigen::Index>(n));
  parallel_for(n, resolve_threads(threads), [&](std::size_t j) {
    const NodeStatus s = run.status[j];
    if (s == NodeStatus::Propagated || s == NodeStatus::Mirrored)
      run.node_pes.col(static_cast<Eigen::Index>(j)) = engine.pes(run.final_state(j));
  });
}

Eigen::VectorXd qrep_total_pes(EnsembleRun& run) {
  if (run.node_pes.cols() == 0) throw invalid_parameter("node spectra are not attached");
  Eigen::VectorXd total = Eigen::VectorXd::Zero(run.node_pes.rows());
  double all = 0.0, done = 0.0;
  for (std::size_t j = 0; j < run.quadrature.size(); ++j) {
    const double w = run.incoherent_weight(j);
    all += w;
    if (run.status[j] == NodeStatus::Failed) continue;
    done += w;
    if (run.status[j] != NodeStatus::Screened) total += w * run.node_pes.col(static_cast<Eigen::Index>(j));
  }
  if (!run.complete() && done > 0.0) {
    total *= all / done;
    run.warnings.push_back("partial ensemble: spectrum renormalized over " +
                           std::to_string(done / all) + " of the Q weight");
  }
  return total;
}

Eigen::MatrixXd qrep_joint(const EnsembleRun& run, const FockBand& band) {
  if (run.node_pes.cols() == 0) throw invalid_parameter("node spectra are not attached");
  Eigen::MatrixXd joint = Eigen::MatrixXd::Zero(run.node_pes.rows(), band.count());
  for (std::size_t j = 0; j < run.quadrature.size(); ++j) {
    const NodeStatus s = run.status[j];
    if (s == NodeStatus::Screened || s == NodeStatus::Failed) continue;
    const Eigen::VectorXd p = run.incoherent_weight(j) * poisson_column(run.quadrature.nodes[j].alpha, band);
    joint.noalias() += run.node_pes.col(static_cast<Eigen::Index>(j)) * p.transpose();
  }
  return joint;
}

Eigen::VectorXd qrep_photon_dist(const PhotonSpec& photon, const AlphaQuadrature& quad,
                                 const FockBand& band) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(band.count());
  for (const auto& node : quad.nodes)
    p += node.weight * std::norm(photon.overlap(node.alpha)) * poisson_column(node.alpha, band);
  return p;
}

Eigen::VectorXd qrep_photon_dist(const EnsembleRun& run, const FockBand& band) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(band.count());
  for (std::size_t j = 0; j < run.quadrature.size(); ++j)
    p += run.incoherent_weight(j) * poisson_column(run.quadrature.nodes[j].alpha, band);
  return p;
}

JointState rrep_joint_state(const EnsembleRun& run, const FockBand& band) {
  require_states(run);
  const auto& layout = run.quadrature.layout;
  if (layout.rule == QuadratureRule::Polar && layout.n_angular < min_angular_nodes(band))
    throw invalid_parameter("polar rule has " + std::to_string(layout.n_angular) +
                            " angular nodes; the band needs at least " +
                            std::to_string(min_angular_nodes(band)));

  // C = Psi K_direct + reverse_rows(Psi K_mirrored), accumulated in blocks
  // of propagated columns so K never has to be held in full.
  const Eigen::Index nx = run.grid.size(), nb = band.count();
  const Eigen::Index cols = run.states.cols();
  Eigen::MatrixXcd direct = Eigen::MatrixXcd::Zero(nx, nb);
  Eigen::MatrixXcd mirrored = Eigen::MatrixXcd::Zero(nx, nb);
  Eigen::MatrixXcd kd(kNodeBlock, nb), km(kNodeBlock, nb);

  std::vector<std::vector<std::size_t>> users(static_cast<std::size_t>(cols));
  for (std::size_t j = 0; j < run.quadrature.size(); ++j) {
    if (run.status[j] == NodeStatus::Propagated) users[run.slot[j]].push_back(j);
  }
  for (std::size_t j = 0; j < run.quadrature.size(); ++j) {
    if (run.status[j] == NodeStatus::Mirrored) users[run.slot[run.slot[j]]].push_back(j);
  }

  for (Eigen::Index b0 = 0; b0 < cols; b0 += kNodeBlock) {
    const Eigen::Index len = std::min(kNodeBlock, cols - b0);
    kd.setZero();
    km.setZero();
    bool any_mirror = false;
    for (Eigen::Index c = 0; c < len; ++c) {
      for (std::size_t j : users[b0 + c]) {
        const auto& node = run.quadrature.nodes[j];
        Eigen::VectorXcd k = coherent_overlaps(node.alpha, band);
        k *= node.weight * run.overlaps[static_cast<Eigen::Index>(j)];
        if (run.status[j] == NodeStatus::Mirrored) {
          km.row(c) += k.transpose();
          any_mirror = true;
        } else {
          kd.row(c) += k.transpose();
        }
      }
    }
    const auto block = run.states.middleCols(b0, len);
    direct.noalias() += block * kd.topRows(len);
    if (any_mirror) mirrored.noalias() += block * km.topRows(len);
  }

  JointState out{run.grid, band, std::move(direct), 0.0};
  out.c += mirrored.colwise().reverse();
  return out;
}

Eigen::VectorXd rrep_photon_dist(const EnsembleRun& run, const FockBand& band) {
  return photon_distribution(rrep_joint_state(run, band));
}

Eigen::MatrixXd rrep_joint_spectrum(const EnsembleRun& run, const AtomModel& atom,
                                    const EnergyGrid& egrid, const FockBand& band,
                                    int project_bound, int threads) {
  return joint_spectrum(rrep_joint_state(run, band), atom, egrid, project_bound, threads);
}

DiagonalTruncation diagonal_truncation(const EnsembleRun& run, const FockBand& band) {
  require_states(run);
  DiagonalTruncation out;
  out.photon_dist = Eigen::VectorXd::Zero(band.count());
  const bool spectra = run.node_pes.cols() > 0;
  if (spectra) out.joint = Eigen::MatrixXd::Zero(run.node_pes.rows(), band.count());
  const double dx = run.grid.dx();
  for (std::size_t j = 0; j < run.quadrature.size(); ++j) {
    const NodeStatus s = run.status[j];
    if (s == NodeStatus::Screened) continue;
    const Eigen::VectorXd p = run.incoherent_weight(j) * poisson_column(run.quadrature.nodes[j].alpha, band);
    const double mass = run.final_state(j).squaredNorm() * dx;
    out.photon_dist += mass * p;
    if (spectra) out.joint.noalias() += run.node_pes.col(static_cast<Eigen::Index>(j)) * p.transpose();
  }
  return out;
}

}  // namespace qls
