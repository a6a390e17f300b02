// SPDX-License-Identifier: Apache-2.0
//
// Closed-form performance evaluation: downlink SINR/SE, the untrusted
// receiver's interference-plus-noise denominator, observation SINR at the
// CPU, and the monitoring success probability.  All functions are pure and
// depend only on large-scale state; small-scale fading never enters here.

#pragma once

#include <string>

#include "grouping.hpp"
#include "scenario.hpp"

namespace jcam {

struct PerformanceReport {
    Eigen::VectorXd sinr_dl;        // K, linear
    Eigen::VectorXd se_dl;          // K, bits/s/Hz
    Eigen::VectorXd gamma_u_denom;  // U, linear
    Eigen::VectorXd sinr_obs;       // U, linear
    Eigen::VectorXd msp;            // U, in [0,1]
    double min_se = 0.0;            // +inf when K = 0 (vacuous QoS)
    double min_msp = 0.0;           // +inf when U = 0
};

// Coherent beamforming-gain root of a numerator before power scaling and
// squaring: strong APs contribute sqrt((N-|S|)*gamma), weak ones sqrt(N*gamma).
double downlink_numerator_root(int k, const LargeScaleState& ls, const GroupingState& groups,
                               const SystemConfig& config);
double observation_numerator_root(int u, const LargeScaleState& ls, const GroupingState& groups,
                                  const SystemConfig& config);

double sinr_downlink_user(int k, const LargeScaleState& ls, const GroupingState& groups,
                          const ModeAssignment& a, const SystemConfig& config);

double se_downlink_user(int k, const LargeScaleState& ls, const GroupingState& groups,
                        const ModeAssignment& a, const SystemConfig& config);

// SE from an already-computed SINR; the (T - tau)/T prefactor lives here.
double se_from_sinr(double sinr, const SystemConfig& config);

double untrusted_rx_denominator(int u, const LargeScaleState& ls, const GroupingState& groups,
                                const ModeAssignment& a, const SystemConfig& config);

double sinr_observation(int u, const LargeScaleState& ls, const GroupingState& groups,
                        const ModeAssignment& a, const SystemConfig& config);

// Monitoring success probability: 1 - exp(-sinr_obs * gamma_u / (rho_u * beta_pair_u)).
double msp(double sinr_obs, double gamma_u, double rho_u, double beta_pair_u);

PerformanceReport evaluate(const LargeScaleState& ls, const GroupingState& groups,
                           const ModeAssignment& a, const SystemConfig& config);

// CSV detail rows: kind,index,sinr_dl,se_dl,gamma_u,sinr_obs,msp.
std::string report_to_csv(const PerformanceReport& report);

}  // namespace jcam
