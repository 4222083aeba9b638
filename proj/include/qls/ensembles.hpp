#pragma once

// Ensemble engines over an alpha quadrature. Every node runs one
// classical-field propagation; the Q-representation combines node results
// incoherently with weight |<alpha|phi>|^2, the R-representation sums node
// wavefunctions coherently with <n|alpha><alpha|phi>.

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "qls/photon.hpp"
#include "qls/propagators.hpp"
#include "qls/spectra.hpp"

namespace qls {

enum class NodeStatus : std::uint8_t { Screened, Propagated, Mirrored, Failed };

struct EnsembleOptions {
  // alpha <-> -alpha is x <-> -x for a symmetric atom: propagate one of
  // each pair of a polar rule and mirror the other.
  bool parity_saver = true;
  // Nodes with |<alpha|phi>| below this are not propagated.
  double screen_tol = 1e-12;
  bool allow_partial = false;
  // Memory-saving mode keeps only per-node spectra (needs `spectra`).
  bool keep_states = true;
  const SpectrumEngine* spectra = nullptr;
  int threads = 0;
  // Optional dispatch permutation of the propagation tasks.
  std::vector<std::size_t> dispatch_order;
  ClassicalOptions classical;
};

struct EnsembleRun {
  AlphaQuadrature quadrature;
  PhotonSpec photon;
  SpaceGrid grid{1.0, 3};
  Eigen::VectorXcd overlaps;      // <alpha_j|phi> for every node
  std::vector<NodeStatus> status;
  std::vector<long> slot;         // state column, or partner node when mirrored
  Eigen::MatrixXcd states;        // nx x (propagated nodes); empty in memory-saving mode
  Eigen::MatrixXd node_pes;       // n_bins x nodes; empty until spectra are attached
  std::vector<std::size_t> failed;
  std::vector<std::string> warnings;

  bool complete() const { return failed.empty(); }
  bool has_states() const { return states.cols() > 0 || propagated_count() == 0; }
  std::size_t propagated_count() const;
  // Final electron state of node j (zero for screened nodes).
  Eigen::VectorXcd final_state(std::size_t j) const;
  // |<alpha_j|phi>|^2 w_j, the incoherent weight of node j.
  double incoherent_weight(std::size_t j) const;
};

EnsembleRun run_ensemble(const ElectronState& psi0, const AtomModel& atom, const FieldParams& fp,
                         const PulseEnvelope& env, const Schedule& sched, const PhotonSpec& photon,
                         const AlphaQuadrature& quad, const EnsembleOptions& opts = {});

// Fills run.node_pes (n_bins x nodes).
void attach_node_spectra(EnsembleRun& run, const SpectrumEngine& engine, int threads = 0);

// P_Q(E) = sum_j w_j |<a_j|phi>|^2 P(E; a_j). Tolerates partial runs by
// renormalizing over the completed nodes (with a warning appended).
Eigen::VectorXd qrep_total_pes(EnsembleRun& run);

// P_Q(E, n) = sum_j w_j |<a_j|phi>|^2 |<n|a_j>|^2 P(E; a_j).
Eigen::MatrixXd qrep_joint(const EnsembleRun& run, const FockBand& band);

// P_Q(n) = sum_j w_j |<a_j|phi>|^2 |<n|a_j>|^2; never touches electrons.
Eigen::VectorXd qrep_photon_dist(const PhotonSpec& photon, const AlphaQuadrature& quad,
                                 const FockBand& band);
Eigen::VectorXd qrep_photon_dist(const EnsembleRun& run, const FockBand& band);

// c_R(x, n) = sum_j w_j <n|a_j><a_j|phi> psi_e(x; a_j). Requires a complete
// run with retained states.
JointState rrep_joint_state(const EnsembleRun& run, const FockBand& band);
Eigen::VectorXd rrep_photon_dist(const EnsembleRun& run, const FockBand& band);
Eigen::MatrixXd rrep_joint_spectrum(const EnsembleRun& run, const AtomModel& atom,
                                    const EnergyGrid& egrid, const FockBand& band,
                                    int project_bound = 8, int threads = 0);

// The R-representation with its off-diagonal (alpha != beta) coherences
// dropped: reduces to the Q-representation observables.
struct DiagonalTruncation {
  Eigen::VectorXd photon_dist;
  Eigen::MatrixXd joint;  // empty unless node spectra are attached
};
DiagonalTruncation diagonal_truncation(const EnsembleRun& run, const FockBand& band);

}  // namespace qls
