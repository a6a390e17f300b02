// SPDX-License-Identifier: Apache-2.0

#include "scenario.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "estimation.hpp"
#include "rng.hpp"

namespace jcam {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void append_matrix_block(std::string& out, const char* name, const Eigen::MatrixXd& m) {
    out += "# ";
    out += name;
    out += '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c) out += ',';
            out += fmt_double(m(r, c));
        }
        out += '\n';
    }
}

}  // namespace

void SystemConfig::validate() const {
    require(M >= 1, "SystemConfig.M: need at least one AP");
    require(N >= 2, "SystemConfig.N: need at least two antennas per AP");
    require(K >= 0, "SystemConfig.K: negative user count");
    require(U >= 0, "SystemConfig.U: negative untrusted pair count");
    require(K + U >= 1, "SystemConfig: K + U must be at least 1");
    require(area_side_m > 0.0, "SystemConfig.area_side_m: must be positive");
    require(p_ap_watts > 0.0, "SystemConfig.p_ap_watts: must be positive");
    require(static_cast<int>(p_untrusted_watts.size()) == U,
            "SystemConfig.p_untrusted_watts: need one entry per untrusted pair");
    for (double p : p_untrusted_watts)
        require(p > 0.0, "SystemConfig.p_untrusted_watts: must be positive");
    require(bandwidth_hz > 0.0, "SystemConfig.bandwidth_hz: must be positive");
    const int tau_eff = tau;
    require(tau_eff >= 1, "SystemConfig.tau: must be at least 1");
    require(K + U <= tau_eff, "SystemConfig.tau: pilot length below K + U");
    require(tau_eff <= T, "SystemConfig.T: coherence interval below tau");
    require(grouping_threshold > 0.0 && grouping_threshold < 1.0,
            "SystemConfig.grouping_threshold: must lie in (0,1)");
    require(d_min_m > 0.0, "SystemConfig.d_min_m: must be positive");
    require(e_min > 0.0, "SystemConfig.e_min: must be positive");
}

double SystemConfig::noise_watts() const { return std::pow(10.0, (noise_dbm - 30.0) / 10.0); }

double SystemConfig::rho_d() const { return p_ap_watts / noise_watts(); }

double SystemConfig::rho_u(int u) const { return p_untrusted_watts.at(static_cast<size_t>(u)) / noise_watts(); }

double SystemConfig::eta() const { return 1.0 / static_cast<double>(K + U); }

double SystemConfig::rho_pilot_user() const {
    if (p_untrusted_watts.empty())
        throw std::domain_error("SystemConfig: no uplink pilot power defined (U = 0)");
    return rho_u(0);
}

double SystemConfig::rho_pilot_untrusted(int u) const { return rho_u(u); }

double Layout::distance(const Vec2& a, const Vec2& b) const {
    const double d = std::hypot(a.x - b.x, a.y - b.y);
    return std::max(d, d_min_m);
}

const Vec2& Layout::user_side(int g) const {
    const int k = static_cast<int>(users.size());
    const int u = static_cast<int>(urx.size());
    if (g < k) return users[static_cast<size_t>(g)];
    if (g < k + u) return urx[static_cast<size_t>(g - k)];
    return utx.at(static_cast<size_t>(g - k - u));
}

double path_loss_db(double distance_m) {
    if (!(distance_m > 0.0)) throw std::domain_error("path_loss_db: distance must be positive");
    return -30.5 - 36.7 * std::log10(distance_m);
}

double beta_linear(double distance_m, double shadow_db) {
    return std::pow(10.0, path_loss_db(distance_m) / 10.0) * std::pow(10.0, shadow_db / 10.0);
}

Layout place_nodes(const SystemConfig& config, std::uint64_t seed) {
    config.validate();
    Layout layout;
    layout.area_side_m = config.area_side_m;
    layout.d_min_m = config.d_min_m;

    // Per-class substreams keep user-side geometry identical across drops
    // that differ only in the AP deployment (paired baselines rely on it).
    auto fill = [&](std::vector<Vec2>& nodes, int n, const char* tag) {
        Rng rng(derive_seed(seed, tag));
        nodes.resize(static_cast<size_t>(n));
        for (auto& p : nodes) {
            p.x = rng.uniform(0.0, config.area_side_m);
            p.y = rng.uniform(0.0, config.area_side_m);
        }
    };
    fill(layout.aps, config.M, "place-ap");
    fill(layout.users, config.K, "place-user");
    fill(layout.urx, config.U, "place-urx");
    fill(layout.utx, config.U, "place-utx");
    return layout;
}

Eigen::MatrixXd correlated_shadowing(const Layout& layout, std::uint64_t seed) {
    const int G = layout.user_side_count();
    const int M = static_cast<int>(layout.aps.size());

    // Covariance over user-side nodes; the same factor serves every AP row.
    Eigen::MatrixXd cov(G, G);
    for (int g = 0; g < G; ++g) {
        cov(g, g) = 16.0;
        for (int h = g + 1; h < G; ++h) {
            const double d = layout.distance(layout.user_side(g), layout.user_side(h));
            const double c = 16.0 * std::exp2(-d / 9.0);
            cov(g, h) = c;
            cov(h, g) = c;
        }
    }

    Eigen::MatrixXd factor;
    if (G > 0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
        Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);  // clip numeric negatives
        factor = es.eigenvectors() * lam.cwiseSqrt().asDiagonal();
    }

    Eigen::MatrixXd shadow(M, G);
    Rng rng(derive_seed(seed, "shadow-user-side"));
    Eigen::VectorXd z(G);
    for (int m = 0; m < M; ++m) {
        for (int g = 0; g < G; ++g) z(g) = rng.normal();
        shadow.row(m) = (factor * z).transpose();
    }
    return shadow;
}

LargeScaleState build_large_scale(const Layout& layout, const SystemConfig& config, std::uint64_t seed) {
    config.validate();
    const int M = config.M;
    const int K = config.K;
    const int U = config.U;
    if (U == 0)
        throw std::domain_error("build_large_scale: no uplink pilot power defined (U = 0)");

    LargeScaleState ls;
    const Eigen::MatrixXd shadow = correlated_shadowing(layout, seed);

    ls.beta_dl.resize(M, K);
    ls.gamma_dl.resize(M, K);
    for (int m = 0; m < M; ++m)
        for (int k = 0; k < K; ++k) {
            const double d = layout.distance(layout.aps[m], layout.users[k]);
            ls.beta_dl(m, k) = beta_linear(d, shadow(m, k));
            ls.gamma_dl(m, k) = mmse_quality(ls.beta_dl(m, k), config.tau, config.rho_pilot_user());
        }

    ls.beta_jam.resize(M, U);
    ls.gamma_jam.resize(M, U);
    ls.beta_obs.resize(M, U);
    ls.gamma_obs.resize(M, U);
    for (int m = 0; m < M; ++m)
        for (int u = 0; u < U; ++u) {
            const double d_rx = layout.distance(layout.aps[m], layout.urx[u]);
            ls.beta_jam(m, u) = beta_linear(d_rx, shadow(m, K + u));
            ls.gamma_jam(m, u) = mmse_quality(ls.beta_jam(m, u), config.tau, config.rho_pilot_untrusted(u));
            const double d_tx = layout.distance(layout.aps[m], layout.utx[u]);
            ls.beta_obs(m, u) = beta_linear(d_tx, shadow(m, K + U + u));
            ls.gamma_obs(m, u) = mmse_quality(ls.beta_obs(m, u), config.tau, config.rho_pilot_untrusted(u));
        }

    // AP->AP links: independent N(0,16) shadowing, symmetric by reciprocity.
    ls.beta_ap = Eigen::MatrixXd::Zero(M, M);
    {
        Rng rng(derive_seed(seed, "shadow-ap-ap"));
        for (int m = 0; m < M; ++m)
            for (int i = m + 1; i < M; ++i) {
                const double d = layout.distance(layout.aps[m], layout.aps[i]);
                const double b = beta_linear(d, 4.0 * rng.normal());
                ls.beta_ap(m, i) = b;
                ls.beta_ap(i, m) = b;
            }
    }

    ls.beta_pair.resize(U);
    {
        Rng rng(derive_seed(seed, "shadow-pair"));
        for (int u = 0; u < U; ++u) {
            const double d = layout.distance(layout.utx[u], layout.urx[u]);
            ls.beta_pair(u) = beta_linear(d, 4.0 * rng.normal());
        }
    }

    ls.beta_utx_user.resize(U, K);
    {
        Rng rng(derive_seed(seed, "shadow-utx-user"));
        for (int u = 0; u < U; ++u)
            for (int k = 0; k < K; ++k) {
                const double d = layout.distance(layout.utx[u], layout.users[k]);
                ls.beta_utx_user(u, k) = beta_linear(d, 4.0 * rng.normal());
            }
    }

    return ls;
}

std::string scenario_to_text(const Layout& layout, const LargeScaleState& ls) {
    std::string out;
    out += "# nodes\nkind,index,x_m,y_m\n";
    auto dump_nodes = [&](const char* kind, const std::vector<Vec2>& nodes) {
        for (size_t i = 0; i < nodes.size(); ++i) {
            out += kind;
            out += ',';
            out += std::to_string(i);
            out += ',';
            out += fmt_double(nodes[i].x);
            out += ',';
            out += fmt_double(nodes[i].y);
            out += '\n';
        }
    };
    dump_nodes("ap", layout.aps);
    dump_nodes("user", layout.users);
    dump_nodes("urx", layout.urx);
    dump_nodes("utx", layout.utx);

    append_matrix_block(out, "beta_dl", ls.beta_dl);
    append_matrix_block(out, "beta_jam", ls.beta_jam);
    append_matrix_block(out, "beta_obs", ls.beta_obs);
    append_matrix_block(out, "beta_ap", ls.beta_ap);
    append_matrix_block(out, "beta_pair", ls.beta_pair);
    append_matrix_block(out, "beta_utx_user", ls.beta_utx_user);
    append_matrix_block(out, "gamma_dl", ls.gamma_dl);
    append_matrix_block(out, "gamma_jam", ls.gamma_jam);
    append_matrix_block(out, "gamma_obs", ls.gamma_obs);
    return out;
}

}  // namespace jcam
