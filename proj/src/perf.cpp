// SPDX-License-Identifier: Apache-2.0

#include "perf.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace jcam {

namespace {

// Coherent beamforming-gain root shared by the downlink and observation
// numerators: strong APs contribute sqrt((N-|S|)*gamma), weak ones sqrt(N*gamma).
double numerator_root(const std::vector<int>& z, const std::vector<int>& zbar,
                      const std::vector<std::vector<int>>& strong_sets, const Eigen::MatrixXd& gamma,
                      int target, int N) {
    double lin = 0.0;
    for (int m : z) {
        const double ns = static_cast<double>(N - static_cast<int>(strong_sets[static_cast<size_t>(m)].size()));
        lin += std::sqrt(ns * gamma(m, target));
    }
    for (int m : zbar) lin += std::sqrt(static_cast<double>(N) * gamma(m, target));
    return lin;
}

}  // namespace

double downlink_numerator_root(int k, const LargeScaleState& ls, const GroupingState& groups,
                               const SystemConfig& config) {
    return numerator_root(groups.z_d[static_cast<size_t>(k)], groups.zbar_d[static_cast<size_t>(k)],
                          groups.parts.d.strong, ls.gamma_dl, k, config.N);
}

double observation_numerator_root(int u, const LargeScaleState& ls, const GroupingState& groups,
                                  const SystemConfig& config) {
    return numerator_root(groups.z_o[static_cast<size_t>(u)], groups.zbar_o[static_cast<size_t>(u)],
                          groups.parts.o.strong, ls.gamma_obs, u, config.N);
}

double sinr_downlink_user(int k, const LargeScaleState& ls, const GroupingState& groups,
                          const ModeAssignment& a, const SystemConfig& config) {
    const double eta_rho = config.eta() * config.rho_d();
    const double lin = downlink_numerator_root(k, ls, groups, config);
    const double num = eta_rho * lin * lin;

    // The beta/gamma factors inside the k' and u' sums carry the target
    // index k, so those sums reduce to multiplicities.
    double beta_sum = 0.0;   // sum over downlink APs of beta_dl[m,k]
    double gamma_sub = 0.0;  // sum over downlink APs of |S_D[m]| * gamma_dl[m,k]
    for (int m = 0; m < config.M; ++m) {
        if (!a.a[static_cast<size_t>(m)]) continue;
        beta_sum += ls.beta_dl(m, k);
        gamma_sub += static_cast<double>(groups.parts.d.strong[static_cast<size_t>(m)].size()) * ls.gamma_dl(m, k);
    }
    double ui = 0.0;
    for (int u = 0; u < config.U; ++u) ui += config.rho_u(u) * ls.beta_utx_user(u, k);

    const double den = eta_rho * (static_cast<double>(config.K) * beta_sum - gamma_sub +
                                  static_cast<double>(config.U) * beta_sum) +
                       ui + 1.0;
    return num / den;
}

double se_from_sinr(double sinr, const SystemConfig& config) {
    const double pre = static_cast<double>(config.T - config.tau) / static_cast<double>(config.T);
    return pre * std::log2(1.0 + sinr);
}

double se_downlink_user(int k, const LargeScaleState& ls, const GroupingState& groups,
                        const ModeAssignment& a, const SystemConfig& config) {
    return se_from_sinr(sinr_downlink_user(k, ls, groups, a, config), config);
}

double untrusted_rx_denominator(int u, const LargeScaleState& ls, const GroupingState& groups,
                                const ModeAssignment& a, const SystemConfig& config) {
    double cross = 0.0;  // other pairs' own links, as printed
    for (int up = 0; up < config.U; ++up)
        if (up != u) cross += config.rho_u(up) * ls.beta_pair(up);

    double beta_sum = 0.0;   // sum over downlink APs of beta_jam[m,u]
    double gamma_sub = 0.0;  // sum over downlink APs of |S_J[m]| * gamma_jam[m,u]
    for (int m = 0; m < config.M; ++m) {
        if (!a.a[static_cast<size_t>(m)]) continue;
        beta_sum += ls.beta_jam(m, u);
        gamma_sub += static_cast<double>(groups.parts.j.strong[static_cast<size_t>(m)].size()) * ls.gamma_jam(m, u);
    }

    const double eta_rho = config.eta() * config.rho_d();
    return cross +
           eta_rho * (static_cast<double>(config.U) * beta_sum - gamma_sub +
                      static_cast<double>(config.K) * beta_sum) +
           1.0;
}

double sinr_observation(int u, const LargeScaleState& ls, const GroupingState& groups,
                        const ModeAssignment& a, const SystemConfig& config) {
    if (groups.z_o[static_cast<size_t>(u)].empty() && groups.zbar_o[static_cast<size_t>(u)].empty())
        return 0.0;  // no monitoring APs

    const double lin = observation_numerator_root(u, ls, groups, config);
    const double num = config.rho_u(u) * lin * lin;

    double uplink = 0.0;  // sum_{u'} rho_u' * sum_{monitoring m} beta_obs[m,u']
    double noise = 0.0;
    for (int m = 0; m < config.M; ++m) {
        if (a.a[static_cast<size_t>(m)]) continue;
        noise += 1.0;
        for (int up = 0; up < config.U; ++up) uplink += config.rho_u(up) * ls.beta_obs(m, up);
    }

    // Printed gamma subtraction: over the MR-combining APs for target u,
    // summed across all transmitters u'.
    double gamma_sub = 0.0;
    for (int m : groups.zbar_o[static_cast<size_t>(u)])
        for (int up = 0; up < config.U; ++up) gamma_sub += config.rho_u(up) * ls.gamma_obs(m, up);

    double ap_cross = 0.0;
    for (int m = 0; m < config.M; ++m) {
        if (a.a[static_cast<size_t>(m)]) continue;
        for (int i = 0; i < config.M; ++i)
            if (a.a[static_cast<size_t>(i)]) ap_cross += ls.beta_ap(m, i);
    }

    const double den = uplink - gamma_sub + config.eta() * config.rho_d() * ap_cross + noise;
    return num / den;
}

double msp(double sinr_obs, double gamma_u, double rho_u, double beta_pair_u) {
    if (!(sinr_obs >= 0.0) || !(gamma_u >= 0.0))
        throw std::domain_error("msp: sinr_obs and gamma_u must be nonnegative");
    if (!(rho_u > 0.0)) throw std::domain_error("msp: rho_u must be positive");
    if (!(beta_pair_u > 0.0)) throw std::domain_error("msp: beta_pair_u must be positive");
    return 1.0 - std::exp(-sinr_obs * gamma_u / (rho_u * beta_pair_u));
}

PerformanceReport evaluate(const LargeScaleState& ls, const GroupingState& groups,
                           const ModeAssignment& a, const SystemConfig& config) {
    PerformanceReport r;
    r.sinr_dl.resize(config.K);
    r.se_dl.resize(config.K);
    r.gamma_u_denom.resize(config.U);
    r.sinr_obs.resize(config.U);
    r.msp.resize(config.U);

    r.min_se = std::numeric_limits<double>::infinity();
    for (int k = 0; k < config.K; ++k) {
        r.sinr_dl(k) = sinr_downlink_user(k, ls, groups, a, config);
        r.se_dl(k) = se_from_sinr(r.sinr_dl(k), config);
        r.min_se = std::min(r.min_se, r.se_dl(k));
    }

    r.min_msp = std::numeric_limits<double>::infinity();
    for (int u = 0; u < config.U; ++u) {
        r.gamma_u_denom(u) = untrusted_rx_denominator(u, ls, groups, a, config);
        r.sinr_obs(u) = sinr_observation(u, ls, groups, a, config);
        r.msp(u) = msp(r.sinr_obs(u), r.gamma_u_denom(u), config.rho_u(u), ls.beta_pair(u));
        r.min_msp = std::min(r.min_msp, r.msp(u));
    }
    return r;
}

std::string report_to_csv(const PerformanceReport& report) {
    std::string out = "kind,index,sinr_dl,se_dl,gamma_u,sinr_obs,msp\n";
    char buf[160];
    for (Eigen::Index k = 0; k < report.sinr_dl.size(); ++k) {
        std::snprintf(buf, sizeof buf, "user,%lld,%.12g,%.12g,,,\n", static_cast<long long>(k),
                      report.sinr_dl(k), report.se_dl(k));
        out += buf;
    }
    for (Eigen::Index u = 0; u < report.sinr_obs.size(); ++u) {
        std::snprintf(buf, sizeof buf, "link,%lld,,,%.12g,%.12g,%.12g\n", static_cast<long long>(u),
                      report.gamma_u_denom(u), report.sinr_obs(u), report.msp(u));
        out += buf;
    }
    return out;
}

}  // namespace jcam
