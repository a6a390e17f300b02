// SPDX-License-Identifier: Apache-2.0

#include "assignment.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "rng.hpp"

namespace jcam {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool qos_ok(double min_se, double qos) { return min_se >= qos; }

AssignmentResult evaluate_fixed(const LargeScaleState& ls, const SystemConfig& config,
                                const ModeAssignment& a) {
    AssignmentResult res;
    res.assignment = a;
    const GroupingState groups = build_groups(ls, a, config);
    res.report = evaluate(ls, groups, a, config);
    res.feasible = qos_ok(res.report.min_se, config.qos_se);
    return res;
}

}  // namespace

CandidateScreen::CandidateScreen(const LargeScaleState& ls, const ApPartitions& parts,
                                 const SystemConfig& config)
    : ls_(&ls), cfg_(&config) {
    const int M = config.M;
    const int K = config.K;
    const int U = config.U;
    eta_rho_ = config.eta() * config.rho_d();
    se_pre_ = static_cast<double>(config.T - config.tau) / static_cast<double>(config.T);

    rho_u_.resize(U);
    for (int u = 0; u < U; ++u) rho_u_(u) = config.rho_u(u);

    num_term_dl_.resize(M, K);
    gsub_dl_.resize(M, K);
    for (int m = 0; m < M; ++m) {
        const auto& strong = parts.d.strong[static_cast<size_t>(m)];
        const double ns = static_cast<double>(config.N - static_cast<int>(strong.size()));
        const double sz = static_cast<double>(strong.size());
        for (int k = 0; k < K; ++k) {
            const bool s = parts.d.is_strong[static_cast<size_t>(m)][static_cast<size_t>(k)] != 0;
            num_term_dl_(m, k) = std::sqrt((s ? ns : static_cast<double>(config.N)) * ls.gamma_dl(m, k));
            gsub_dl_(m, k) = sz * ls.gamma_dl(m, k);
        }
    }

    jsub_.resize(M, U);
    num_term_obs_.resize(M, U);
    beta_jam_w_ = ls.beta_jam;
    obs_strong_.assign(static_cast<size_t>(M), std::vector<char>(static_cast<size_t>(U), 0));
    obs_weak_rowsum_.resize(M);
    obs_mass_.resize(M);
    for (int m = 0; m < M; ++m) {
        const double szj = static_cast<double>(parts.j.strong[static_cast<size_t>(m)].size());
        const double nso =
            static_cast<double>(config.N - static_cast<int>(parts.o.strong[static_cast<size_t>(m)].size()));
        double rowsum = 0.0;
        double mass = 0.0;
        for (int u = 0; u < U; ++u) {
            jsub_(m, u) = szj * ls.gamma_jam(m, u);
            const bool s = parts.o.is_strong[static_cast<size_t>(m)][static_cast<size_t>(u)] != 0;
            obs_strong_[static_cast<size_t>(m)][static_cast<size_t>(u)] = s ? 1 : 0;
            num_term_obs_(m, u) = std::sqrt((s ? nso : static_cast<double>(config.N)) * ls.gamma_obs(m, u));
            rowsum += rho_u_(u) * ls.gamma_obs(m, u);
            mass += rho_u_(u) * ls.beta_obs(m, u);
        }
        obs_weak_rowsum_(m) = rowsum;
        obs_mass_(m) = mass;
    }

    ui_.resize(K);
    for (int k = 0; k < K; ++k) {
        double s = 0.0;
        for (int u = 0; u < U; ++u) s += rho_u_(u) * ls.beta_utx_user(u, k);
        ui_(k) = s;
    }

    pair_int_.resize(U);
    for (int u = 0; u < U; ++u) {
        double s = 0.0;
        for (int up = 0; up < U; ++up)
            if (up != u) s += rho_u_(up) * ls.beta_pair(up);
        pair_int_(u) = s;
    }
}

void CandidateScreen::rebase(const ModeAssignment& a) {
    const int M = cfg_->M;
    const int K = cfg_->K;
    const int U = cfg_->U;
    a_ = a.a;

    L_dl_ = Eigen::VectorXd::Zero(K);
    B_dl_ = Eigen::VectorXd::Zero(K);
    G_dl_ = Eigen::VectorXd::Zero(K);
    B_jam_ = Eigen::VectorXd::Zero(U);
    G_jam_ = Eigen::VectorXd::Zero(U);
    L_obs_ = Eigen::VectorXd::Zero(U);
    G_obs_ = Eigen::VectorXd::Zero(U);
    ap_dl_sum_ = Eigen::VectorXd::Zero(M);
    ap_mo_sum_ = Eigen::VectorXd::Zero(M);
    t1_ = 0.0;
    cross_ = 0.0;
    n_mo_ = 0;

    for (int m = 0; m < M; ++m) {
        if (a_[static_cast<size_t>(m)]) {
            for (int k = 0; k < K; ++k) {
                L_dl_(k) += num_term_dl_(m, k);
                B_dl_(k) += ls_->beta_dl(m, k);
                G_dl_(k) += gsub_dl_(m, k);
            }
            for (int u = 0; u < U; ++u) {
                B_jam_(u) += beta_jam_w_(m, u);
                G_jam_(u) += jsub_(m, u);
            }
        } else {
            ++n_mo_;
            t1_ += obs_mass_(m);
            for (int u = 0; u < U; ++u) {
                L_obs_(u) += num_term_obs_(m, u);
                if (!obs_strong_[static_cast<size_t>(m)][static_cast<size_t>(u)]) G_obs_(u) += obs_weak_rowsum_(m);
            }
        }
    }
    for (int j = 0; j < M; ++j) {
        double dl = 0.0;
        double mo = 0.0;
        for (int i = 0; i < M; ++i) {
            if (i == j) continue;
            if (a_[static_cast<size_t>(i)])
                dl += ls_->beta_ap(j, i);
            else
                mo += ls_->beta_ap(i, j);
        }
        ap_dl_sum_(j) = dl;
        ap_mo_sum_(j) = mo;
        if (!a_[static_cast<size_t>(j)]) cross_ += dl;
    }
}

CandidateScreen::Metrics CandidateScreen::current() const {
    Metrics met;
    met.min_se = kInf;
    const int K = cfg_->K;
    const int U = cfg_->U;
    for (int k = 0; k < K; ++k) {
        const double num = eta_rho_ * L_dl_(k) * L_dl_(k);
        const double den =
            eta_rho_ * (static_cast<double>(K + U) * B_dl_(k) - G_dl_(k)) + ui_(k) + 1.0;
        met.min_se = std::min(met.min_se, se_pre_ * std::log2(1.0 + num / den));
    }
    met.min_msp = kInf;
    for (int u = 0; u < U; ++u) {
        const double gamma_u =
            pair_int_(u) + eta_rho_ * (static_cast<double>(K + U) * B_jam_(u) - G_jam_(u)) + 1.0;
        double sinr_o = 0.0;
        if (n_mo_ > 0) {
            const double den_o = t1_ - G_obs_(u) + eta_rho_ * cross_ + static_cast<double>(n_mo_);
            sinr_o = rho_u_(u) * L_obs_(u) * L_obs_(u) / den_o;
        }
        const double p = 1.0 - std::exp(-sinr_o * gamma_u / (rho_u_(u) * ls_->beta_pair(u)));
        met.min_msp = std::min(met.min_msp, p);
    }
    return met;
}

CandidateScreen::Metrics CandidateScreen::screen_move(int x) const {
    Metrics met;
    met.min_se = kInf;
    const int K = cfg_->K;
    const int U = cfg_->U;

    for (int k = 0; k < K; ++k) {
        const double lin = L_dl_(k) - num_term_dl_(x, k);
        const double num = eta_rho_ * lin * lin;
        const double bsum = B_dl_(k) - ls_->beta_dl(x, k);
        const double gsub = G_dl_(k) - gsub_dl_(x, k);
        const double den = eta_rho_ * (static_cast<double>(K + U) * bsum - gsub) + ui_(k) + 1.0;
        met.min_se = std::min(met.min_se, se_pre_ * std::log2(1.0 + num / den));
    }

    const double t1 = t1_ + obs_mass_(x);
    const double cross = cross_ + ap_dl_sum_(x) - ap_mo_sum_(x);
    const double noise = static_cast<double>(n_mo_ + 1);

    met.min_msp = kInf;
    for (int u = 0; u < U; ++u) {
        const double bj = B_jam_(u) - beta_jam_w_(x, u);
        const double gamma_u =
            pair_int_(u) + eta_rho_ * (static_cast<double>(K + U) * bj - (G_jam_(u) - jsub_(x, u))) + 1.0;

        const double lo = L_obs_(u) + num_term_obs_(x, u);
        const double go =
            G_obs_(u) + (obs_strong_[static_cast<size_t>(x)][static_cast<size_t>(u)] ? 0.0 : obs_weak_rowsum_(x));
        const double den_o = t1 - go + eta_rho_ * cross + noise;
        const double sinr_o = rho_u_(u) * lo * lo / den_o;

        const double p = 1.0 - std::exp(-sinr_o * gamma_u / (rho_u_(u) * ls_->beta_pair(u)));
        met.min_msp = std::min(met.min_msp, p);
    }
    return met;
}

AssignmentResult greedy_mode_assignment(const LargeScaleState& ls, const SystemConfig& config) {
    config.validate();
    const int M = config.M;
    const double qos = config.qos_se;

    ModeAssignment a;
    a.a.assign(static_cast<size_t>(M), 1);

    if (config.U == 0) return evaluate_fixed(ls, config, a);  // nothing to monitor

    const ApPartitions parts = build_ap_partitions(ls, config);
    CandidateScreen screen(ls, parts, config);
    screen.rebase(a);

    AssignmentResult res;
    double pi_star = 0.0;  // all-downlink: no monitoring APs, every MSP is 0

    std::vector<int> downlink(static_cast<size_t>(M));
    for (int m = 0; m < M; ++m) downlink[static_cast<size_t>(m)] = m;

    bool have_report = false;
    while (!downlink.empty()) {
        std::vector<char> excluded(downlink.size(), 0);
        std::vector<CandidateScreen::Metrics> screened(downlink.size());
        for (size_t i = 0; i < downlink.size(); ++i) screened[i] = screen.screen_move(downlink[i]);
        res.candidate_evaluations += static_cast<long long>(downlink.size());

        bool accepted = false;
        bool stop = false;
        while (!stop) {
            int best_slot = -1;
            double best_pi = -kInf;
            for (size_t i = 0; i < downlink.size(); ++i) {
                if (excluded[i] || !qos_ok(screened[i].min_se, qos)) continue;
                if (screened[i].min_msp > best_pi) {  // strict: ties keep the lowest AP index
                    best_pi = screened[i].min_msp;
                    best_slot = static_cast<int>(i);
                }
            }
            if (best_slot < 0) {
                stop = true;  // no feasible candidate
                break;
            }

            // Confirm the winner through the same path perf::evaluate uses.
            const int m_star = downlink[static_cast<size_t>(best_slot)];
            a.a[static_cast<size_t>(m_star)] = 0;
            const GroupingState groups = build_groups(parts, a, config.K, config.U);
            const PerformanceReport rep = evaluate(ls, groups, a, config);

            if (!qos_ok(rep.min_se, qos)) {
                // Screen/full disagreement on the QoS edge; drop this
                // candidate for the current iteration only.
                a.a[static_cast<size_t>(m_star)] = 1;
                excluded[static_cast<size_t>(best_slot)] = 1;
                continue;
            }
            if (rep.min_msp - pi_star >= config.e_min) {
                pi_star = rep.min_msp;
                res.report = rep;
                have_report = true;
                res.iterations += 1;
                downlink.erase(downlink.begin() + best_slot);
                screen.rebase(a);
                accepted = true;
            } else {
                a.a[static_cast<size_t>(m_star)] = 1;  // improvement below e_min
                stop = true;
            }
            break;
        }
        if (!accepted || stop) break;
    }

    res.assignment = a;
    if (!have_report) {
        const GroupingState groups = build_groups(parts, a, config.K, config.U);
        res.report = evaluate(ls, groups, a, config);
    }
    res.feasible = qos_ok(res.report.min_se, qos);
    return res;
}

AssignmentResult random_mode_assignment(const LargeScaleState& ls, const SystemConfig& config,
                                        std::uint64_t seed) {
    config.validate();
    const int M = config.M;
    const int n_mo = M / 2;

    std::vector<int> idx(static_cast<size_t>(M));
    for (int m = 0; m < M; ++m) idx[static_cast<size_t>(m)] = m;
    Rng rng(derive_seed(seed, "random-assignment"));
    for (int i = 0; i < n_mo; ++i) {
        const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(M - i)));
        std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(j)]);
    }

    ModeAssignment a;
    a.a.assign(static_cast<size_t>(M), 1);
    for (int i = 0; i < n_mo; ++i) a.a[static_cast<size_t>(idx[static_cast<size_t>(i)])] = 0;
    return evaluate_fixed(ls, config, a);
}

AssignmentResult brute_force_assignment(const LargeScaleState& ls, const SystemConfig& config) {
    config.validate();
    const int M = config.M;
    if (M > 12) throw std::invalid_argument("brute_force_assignment: M > 12 (2^M enumeration refused)");

    const ApPartitions parts = build_ap_partitions(ls, config);
    const double qos = config.qos_se;

    AssignmentResult best;
    bool have_best = false;
    double best_msp = -kInf;

    ModeAssignment a;
    a.a.assign(static_cast<size_t>(M), 0);

    const std::uint32_t total = 1u << M;
    // Bit M-1-m drives a_m: ascending mask order is lexicographic order on
    // the mode vector, so keeping strict improvements picks the smallest.
    for (std::uint32_t mask = 0; mask < total; ++mask) {
        for (int m = 0; m < M; ++m)
            a.a[static_cast<size_t>(m)] = static_cast<std::uint8_t>((mask >> (M - 1 - m)) & 1u);

        const GroupingState groups = build_groups(parts, a, config.K, config.U);
        const PerformanceReport rep = evaluate(ls, groups, a, config);
        if (!qos_ok(rep.min_se, qos)) continue;
        if (!have_best || rep.min_msp > best_msp) {
            have_best = true;
            best_msp = rep.min_msp;
            best.assignment = a;
            best.report = rep;
            best.feasible = true;
        }
    }

    AssignmentResult res;
    if (have_best) {
        res = std::move(best);
    } else {
        a.a.assign(static_cast<size_t>(M), 1);  // no feasible vector
        res = evaluate_fixed(ls, config, a);
        res.feasible = false;
    }
    res.candidate_evaluations = static_cast<long long>(total);
    return res;
}

ColocatedScenario colocated_baseline(const SystemConfig& config, std::uint64_t seed) {
    config.validate();
    if ((static_cast<long long>(config.M) * config.N) % 2 != 0)
        throw std::invalid_argument("colocated_baseline: M*N must be even");

    ColocatedScenario sc;
    sc.config = config;
    sc.config.M = 2;
    sc.config.N = config.M * config.N / 2;
    sc.config.validate();

    sc.layout = place_nodes(sc.config, seed);
    const double c = config.area_side_m / 2.0;
    const double off = config.d_min_m / 2.0;
    sc.layout.aps[0] = {c - off, c};  // downlink array
    sc.layout.aps[1] = {c + off, c};  // monitoring array

    sc.ls = build_large_scale(sc.layout, sc.config, seed);
    sc.assignment.a = {1, 0};
    sc.groups = build_groups(sc.ls, sc.assignment, sc.config);
    return sc;
}

}  // namespace jcam
