// SPDX-License-Identifier: Apache-2.0
//
// Channel-level Monte Carlo oracle: instantaneous channels, MMSE
// estimates, explicit PZF/MR precoders and combiners, and empirical
// use-and-then-forget (UatF) term estimation that validates every closed
// form in perf against the signal model it was derived from.

#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "perf.hpp"
#include "rng.hpp"

namespace jcam::mc {

// One small-scale realization.  Channel vectors are stored one column per
// target node.  AP-to-AP blocks exist for every ordered pair m != i
// (f_ap[m*M + i] is the N x N channel from AP i into AP m); the diagonal
// entries stay empty.  Draw order is fixed: g_dl, g_jam, g_obs, f_ap,
// g_pair, g_utx_user, each AP-major and column-major inside.
struct ChannelRealization {
    std::vector<Eigen::MatrixXcd> g_dl;   // M entries, N x K
    std::vector<Eigen::MatrixXcd> g_jam;  // M entries, N x U
    std::vector<Eigen::MatrixXcd> g_obs;  // M entries, N x U
    std::vector<Eigen::MatrixXcd> f_ap;   // M*M entries, N x N, diagonal empty
    Eigen::VectorXcd g_pair;              // U
    Eigen::MatrixXcd g_utx_user;          // U x K
};

struct EstimatedChannels {
    std::vector<Eigen::MatrixXcd> ghat_dl, ghat_jam, ghat_obs;
};

// Precoders for the D and J roles plus combiners for the O role, built for
// every AP (the strong/weak partitions are mode-independent; the term
// estimators apply the mode mask).  MR columns are ghat/sqrt(N*gamma); PZF
// columns are theta * sqrt((N-|S|)*gamma) with theta a column of
// Ghat_S (Ghat_S^H Ghat_S)^{-1}, which nulls the other strong estimates.
struct BeamformerSet {
    std::vector<Eigen::MatrixXcd> b_dl;   // M entries, N x K
    std::vector<Eigen::MatrixXcd> b_jam;  // M entries, N x U
    std::vector<Eigen::MatrixXcd> v_obs;  // M entries, N x U
    int mr_fallbacks = 0;  // AP/role Gram solves that fell back to MR
};

ChannelRealization draw_smallscale(const LargeScaleState& ls, const SystemConfig& config, Rng& rng);
ChannelRealization draw_smallscale(const LargeScaleState& ls, const SystemConfig& config,
                                   std::uint64_t seed);

// ghat = (gamma/beta) * g + sqrt(gamma*(beta-gamma)/beta) * n with
// n ~ CN(0, I): identical in law to MMSE-filtering the noisy pilot
// observation, with the pilot power folded into gamma by the scenario
// module.  Entry variance is exactly gamma; ghat and g - ghat are
// uncorrelated.
EstimatedChannels mmse_estimate(const ChannelRealization& real, const LargeScaleState& ls, Rng& rng);
EstimatedChannels mmse_estimate(const ChannelRealization& real, const LargeScaleState& ls,
                                std::uint64_t seed);

BeamformerSet build_precoders(const EstimatedChannels& est, const GroupingState& groups,
                              const LargeScaleState& ls, const SystemConfig& config);
// Mirror of build_precoders for monitoring combiners (fills v_obs only).
BeamformerSet build_combiners(const EstimatedChannels& est, const GroupingState& groups,
                              const LargeScaleState& ls, const SystemConfig& config);

// One AP's transmitted vector for freshly drawn unit-power Gaussian
// symbols: sqrt(eta*rho_d) * (sum_k b_dl s_k + sum_u b_jam s_u).
Eigen::VectorXcd transmit_vector(const BeamformerSet& bs, int m, const SystemConfig& config, Rng& rng);

// Raw moment sums over the trials of one chunk.  Coefficient sums are kept
// in channel units; the power scales (eta*rho_d, rho_u) are applied when a
// term table is derived.
struct Moments {
    long long n = 0;

    Eigen::VectorXcd dl_own_sum;    // K: sum of own-stream coefficients
    Eigen::VectorXd dl_own_sq;      // K: sum of |own|^2
    Eigen::VectorXd dl_cross_sq;    // K: sum over k' != k of |coef|^2
    Eigen::VectorXd dl_jam_sq;      // K: sum over jam streams of |coef|^2
    Eigen::VectorXd dl_utx_sq;      // K: sum of rho_u-weighted |g_utx_user|^2

    Eigen::VectorXcd urx_own_sum;   // U: own jamming-stream coefficient
    Eigen::VectorXd urx_jam_sq;     // U: all jam streams, |coef|^2
    Eigen::VectorXd urx_dl_sq;      // U: all data streams, |coef|^2
    Eigen::VectorXd urx_pair_sq;    // U: rho-weighted other-pair powers

    Eigen::VectorXcd obs_own_sum;   // U: combined own-uplink coefficient
    Eigen::VectorXd obs_ul_sq;      // U: rho-weighted all-uplink |coef|^2
    Eigen::VectorXd obs_cross_sq;   // U: all K+U AP-cross streams, |coef|^2
    Eigen::VectorXd obs_noise_sum;  // U: sum over monitoring APs of ||v||^2

    int mr_fallbacks = 0;

    void init(int K, int U);
    void add(const Moments& o);
};

// Chunked estimate: trials are split over 256 fixed chunks with derived
// seeds, run (possibly in parallel) and reduced in chunk order, so results
// are byte-identical for any jobs count.
struct UatfEstimate {
    Moments total;
    std::vector<Moments> chunks;  // nonempty chunks, ascending chunk index
};

UatfEstimate uatf_moments(const LargeScaleState& ls, const GroupingState& groups,
                          const ModeAssignment& a, const SystemConfig& config, long long trials,
                          std::uint64_t seed, int jobs = 1);

// Spec-shaped empirical term table, all entries in power units.
struct UatfTermTable {
    Eigen::VectorXd dl_ds_root;  // K: |E{own coefficient}|
    Eigen::VectorXd dl_ds;       // K: eta*rho_d * root^2
    Eigen::VectorXd dl_bu;       // K: eta*rho_d * variance of own coefficient
    Eigen::VectorXd dl_di;       // K
    Eigen::VectorXd dl_ji;       // K
    Eigen::VectorXd dl_ui;       // K
    Eigen::VectorXd dl_sinr;     // K: exact-UatF composite

    Eigen::VectorXd urx_ui;      // U
    Eigen::VectorXd urx_ji;      // U: variance convention for the own stream
    Eigen::VectorXd urx_ji_raw;  // U: raw second moment (keeps the coherent part)
    Eigen::VectorXd urx_di;      // U
    Eigen::VectorXd urx_gamma;   // U: ui + ji + di + 1

    Eigen::VectorXd obs_ds_root;          // U
    Eigen::VectorXd obs_ds;               // U: rho_u * root^2
    Eigen::VectorXd obs_ul_minus_ds;      // U: BU + cross-uplink interference
    Eigen::VectorXd obs_cross_total;      // U: all K+U downlink streams
    Eigen::VectorXd obs_cross_per_stream; // U: cross_total / (K+U)
    Eigen::VectorXd obs_noise;            // U
    Eigen::VectorXd obs_sinr;             // U: exact-UatF composite

    long long trials = 0;
    int mr_fallbacks = 0;
};

UatfTermTable table_from_moments(const Moments& m, const LargeScaleState& ls,
                                 const SystemConfig& config);
UatfTermTable uatf_terms(const LargeScaleState& ls, const GroupingState& groups,
                         const ModeAssignment& a, const SystemConfig& config, long long trials,
                         std::uint64_t seed, int jobs = 1);

struct VerificationRow {
    std::string term;
    double closed_form = 0.0;
    double empirical = 0.0;
    double rel_error = 0.0;
    double std_error = 0.0;
    bool mandatory = false;  // "disc."-prefixed rows never gate
    bool pass = false;
};

struct VerificationReport {
    std::vector<VerificationRow> rows;
    long long trials = 0;
    double tol = 0.0;
    bool insufficient_samples = false;  // trials < 100
    int mr_fallbacks = 0;
    bool mandatory_pass = true;
};

// Compares every closed-form term against the UatF oracle.  Mandatory rows
// are exact identities of the printed formulas (Eq. 13 composite, every
// Eq. 15 term, Eq. 17 numerator / per-stream AP-cross / noise); rows
// prefixed "disc." record printed-formula discrepancies (Eq. 17's
// gamma-subtraction index set, the single-stream AP-cross term, the
// coherent own-stream jamming power) without gating.  The MC seed is
// derive_seed(config.seed, "verify").
VerificationReport verify_closed_form(const LargeScaleState& ls, const GroupingState& groups,
                                      const ModeAssignment& a, const SystemConfig& config,
                                      long long trials, double tol, int jobs = 1);

// CSV: term,closed_form,empirical,rel_error,std_error,pass.
std::string verification_to_csv(const VerificationReport& report);

// Frequency of sinr_obs >= rho_u * |g|^2 / gamma_u over exponential |g|^2
// draws with mean beta_pair_u; the oracle for the Eq. (20) closed form.
double empirical_msp(double sinr_obs, double gamma_u, double rho_u, double beta_pair_u,
                     long long trials, std::uint64_t seed);

}  // namespace jcam::mc
