// SPDX-License-Identifier: Apache-2.0
//
// AP mode-assignment strategies: greedy selection, random and exhaustive
// baselines, and the co-located full-duplex baseline scenario builder.

#pragma once

#include <cstdint>

#include "perf.hpp"

namespace jcam {

struct AssignmentResult {
    ModeAssignment assignment;
    PerformanceReport report;
    int iterations = 0;                   // accepted moves (greedy only)
    long long candidate_evaluations = 0;  // screened candidates / enumerated vectors
    bool feasible = false;                // final min SE >= qos_se
};

// O(K+U) screening of "move AP x from downlink to monitoring" against the
// closed forms.  Base sums are rebuilt from scratch on every rebase() so a
// candidate value is always one subtraction/addition away from fresh sums
// (no accumulated float drift).  Greedy screens with this and confirms the
// winner with perf::evaluate; parity is property-tested.
class CandidateScreen {
public:
    CandidateScreen(const LargeScaleState& ls, const ApPartitions& parts, const SystemConfig& config);

    void rebase(const ModeAssignment& a);

    struct Metrics {
        double min_se = 0.0;
        double min_msp = 0.0;
    };

    // Metrics after flipping downlink AP x to monitoring; x must currently
    // be downlink in the rebased assignment.
    Metrics screen_move(int x) const;

    // Metrics of the rebased assignment itself (no move).
    Metrics current() const;

private:
    const LargeScaleState* ls_;
    const SystemConfig* cfg_;
    double eta_rho_ = 0.0;
    double se_pre_ = 0.0;

    // Mode-independent per-AP terms.
    Eigen::MatrixXd num_term_dl_;   // M x K, numerator-root contribution
    Eigen::MatrixXd gsub_dl_;       // M x K, |S_D[m]| * gamma_dl
    Eigen::MatrixXd jsub_;          // M x U, |S_J[m]| * gamma_jam
    Eigen::MatrixXd num_term_obs_;  // M x U
    Eigen::MatrixXd beta_jam_w_;    // M x U copy for locality
    std::vector<std::vector<char>> obs_strong_;  // M x U flags
    Eigen::VectorXd obs_weak_rowsum_;  // M, sum_u rho_u * gamma_obs[m,u]
    Eigen::VectorXd obs_mass_;         // M, sum_u rho_u * beta_obs[m,u]
    Eigen::VectorXd ui_;               // K, sum_u rho_u * beta_utx_user[u,k]
    Eigen::VectorXd pair_int_;         // U, sum_{u' != u} rho_u' * beta_pair
    Eigen::VectorXd rho_u_;            // U

    // Base sums for the rebased assignment.
    std::vector<std::uint8_t> a_;
    Eigen::VectorXd L_dl_, B_dl_, G_dl_;   // K
    Eigen::VectorXd B_jam_, G_jam_;        // U
    Eigen::VectorXd L_obs_, G_obs_;        // U
    Eigen::VectorXd ap_dl_sum_, ap_mo_sum_;  // M, beta_ap row sums over DL/MO sets
    double t1_ = 0.0;
    double cross_ = 0.0;
    int n_mo_ = 0;
};

// Algorithm: start all-downlink, repeatedly screen every remaining downlink
// AP, keep QoS-feasible candidates, pick the max-min-MSP one (ties to the
// lowest index) and accept iff the confirmed improvement is >= e_min.
// config.qos_se < 0 disables the QoS constraint.
AssignmentResult greedy_mode_assignment(const LargeScaleState& ls, const SystemConfig& config);

// Exactly floor(M/2) monitoring APs, uniform over subsets.
AssignmentResult random_mode_assignment(const LargeScaleState& ls, const SystemConfig& config,
                                        std::uint64_t seed);

// Exhaustive oracle; refuses M > 12.
AssignmentResult brute_force_assignment(const LargeScaleState& ls, const SystemConfig& config);

// Two virtual APs with M*N/2 antennas each at the area center, d_min apart:
// index 0 downlink, index 1 monitoring.  User-side placement reuses the
// same per-class substreams as place_nodes, so drops pair with cell-free
// runs of the same seed.
struct ColocatedScenario {
    SystemConfig config;  // derived: M=2, N=M*N/2
    Layout layout;
    LargeScaleState ls;
    ModeAssignment assignment;
    GroupingState groups;
};

ColocatedScenario colocated_baseline(const SystemConfig& config, std::uint64_t seed);

}  // namespace jcam
