// SPDX-License-Identifier: Apache-2.0
//
// Network drops: geometry, path loss, correlated shadowing, and the full
// large-scale fading state every other module consumes.

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace jcam {

// All scalar system parameters.  Counts and powers are validated once via
// validate(); the normalized-power accessors assume a validated object.
struct SystemConfig {
    int M = 0;  // APs
    int N = 0;  // antennas per AP
    int K = 0;  // downlink users
    int U = 0;  // untrusted pairs

    double area_side_m = 1000.0;
    double p_ap_watts = 1.0;
    std::vector<double> p_untrusted_watts;  // one entry per untrusted pair
    double noise_dbm = -92.0;
    double bandwidth_hz = 50e6;

    int tau = 0;  // pilot length (symbols); config loader defaults it to K+U
    int T = 200;  // coherence interval (symbols)

    double grouping_threshold = 0.05;
    double d_min_m = 5.0;
    double e_min = 1e-4;
    double qos_se = -1.0;  // < 0: per-drop QoS = random baseline's min SE
    std::uint64_t seed = 1;

    // Throws std::invalid_argument naming the offending field.
    void validate() const;

    double noise_watts() const;        // sigma^2 = 10^((noise_dbm - 30)/10)
    double rho_d() const;              // p_ap_watts / sigma^2
    double rho_u(int u) const;         // p_untrusted_watts[u] / sigma^2
    double eta() const;                // 1 / (K + U)
    double rho_pilot_user() const;     // legitimate-user pilot power
    double rho_pilot_untrusted(int u) const;
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

// Node positions for one drop.  Every reported distance is clamped from
// below by d_min so the path-loss law stays finite.
struct Layout {
    double area_side_m = 0.0;
    double d_min_m = 0.0;
    std::vector<Vec2> aps;
    std::vector<Vec2> users;
    std::vector<Vec2> urx;  // untrusted receivers
    std::vector<Vec2> utx;  // untrusted transmitters

    double distance(const Vec2& a, const Vec2& b) const;

    // User-side nodes in shadowing order: users, untrusted receivers,
    // untrusted transmitters.
    int user_side_count() const { return static_cast<int>(users.size() + urx.size() + utx.size()); }
    const Vec2& user_side(int g) const;
};

// Every beta/gamma coefficient the closed forms and the Monte Carlo oracle
// need.  gamma <= beta elementwise; gamma = 0 iff beta = 0.
struct LargeScaleState {
    Eigen::MatrixXd beta_dl;        // M x K, AP -> user
    Eigen::MatrixXd beta_jam;       // M x U, AP -> untrusted receiver
    Eigen::MatrixXd beta_obs;       // M x U, untrusted transmitter -> AP
    Eigen::MatrixXd beta_ap;        // M x M, AP -> AP (diagonal unused)
    Eigen::VectorXd beta_pair;      // U, untrusted pair links
    Eigen::MatrixXd beta_utx_user;  // U x K, untrusted transmitter -> user
    Eigen::MatrixXd gamma_dl;
    Eigen::MatrixXd gamma_jam;
    Eigen::MatrixXd gamma_obs;
};

double path_loss_db(double distance_m);

// Linear beta from distance and a shadowing value in dB.
double beta_linear(double distance_m, double shadow_db);

Layout place_nodes(const SystemConfig& config, std::uint64_t seed);

// M x (K+2U) shadowing matrix in dB.  Rows (APs) are independent; within a
// row the covariance is 16 * 2^(-dist/9m) over user-side node distances.
Eigen::MatrixXd correlated_shadowing(const Layout& layout, std::uint64_t seed);

LargeScaleState build_large_scale(const Layout& layout, const SystemConfig& config, std::uint64_t seed);

// Plain-text tabular dump (node table, then one CSV block per matrix);
// used by fixture tests and the CLI's scenario dump.
std::string scenario_to_text(const Layout& layout, const LargeScaleState& ls);

}  // namespace jcam
