// SPDX-License-Identifier: Apache-2.0

#include "mc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <stdexcept>
#include <thread>

namespace jcam::mc {

namespace {

constexpr int kChunks = 256;

Eigen::MatrixXcd draw_matrix(int rows, const Eigen::MatrixXd& beta, int m, Rng& rng) {
    Eigen::MatrixXcd out(rows, beta.cols());
    for (Eigen::Index c = 0; c < beta.cols(); ++c) {
        const double b = beta(m, c);
        for (int r = 0; r < rows; ++r) out(r, c) = rng.cnormal(b);
    }
    return out;
}

// MMSE-filtered estimate of one channel class; the noise draw happens for
// every entry so stream positions never depend on the beta values.
Eigen::MatrixXcd estimate_matrix(const Eigen::MatrixXcd& g, const Eigen::MatrixXd& beta,
                                 const Eigen::MatrixXd& gamma, int m, Rng& rng) {
    Eigen::MatrixXcd out(g.rows(), g.cols());
    for (Eigen::Index c = 0; c < g.cols(); ++c) {
        const double b = beta(m, c);
        const double gam = gamma(m, c);
        const double scale = b > 0.0 ? gam / b : 0.0;
        const double noise = b > 0.0 ? std::sqrt(std::max(gam * (b - gam), 0.0) / b) : 0.0;
        for (Eigen::Index r = 0; r < g.rows(); ++r) {
            const std::complex<double> n = rng.cnormal(1.0);
            out(r, c) = scale * g(r, c) + noise * n;
        }
    }
    return out;
}

// MR columns for every target, then PZF columns over the strong set via a
// ridge-regularized Gram solve.  A failed solve keeps MR for that AP/role.
void role_beamformers(const std::vector<Eigen::MatrixXcd>& ghat, const RolePartitions& parts,
                      const Eigen::MatrixXd& gamma, int N, std::vector<Eigen::MatrixXcd>& out,
                      int& fallbacks) {
    const size_t M = ghat.size();
    out.resize(M);
    for (size_t m = 0; m < M; ++m) {
        const Eigen::MatrixXcd& gh = ghat[m];
        const Eigen::Index T = gh.cols();
        Eigen::MatrixXcd& b = out[m];
        b.setZero(N, T);
        for (Eigen::Index t = 0; t < T; ++t) {
            const double gam = gamma(static_cast<int>(m), t);
            if (gam > 0.0) b.col(t) = gh.col(t) / std::sqrt(static_cast<double>(N) * gam);
        }

        const std::vector<int>& s = parts.strong[m];
        if (s.empty()) continue;
        const int ns = static_cast<int>(s.size());
        Eigen::MatrixXcd gs(N, ns);
        for (int j = 0; j < ns; ++j) gs.col(j) = gh.col(s[static_cast<size_t>(j)]);

        // Equilibrate: unit-norm columns keep the Gram conditioning independent
        // of the spread in estimate powers, which spans many orders of magnitude.
        Eigen::VectorXd cn = gs.colwise().norm();
        if (!(cn.minCoeff() > 0.0) || !cn.allFinite()) {
            ++fallbacks;
            continue;
        }
        const Eigen::MatrixXcd an = gs * cn.cwiseInverse().asDiagonal();

        const Eigen::MatrixXcd gram0 = an.adjoint() * an;
        const double ridge = 1e-12 * gram0.trace().real() / static_cast<double>(ns);
        const Eigen::MatrixXcd gram =
            gram0 + ridge * Eigen::MatrixXcd::Identity(ns, ns);

        Eigen::LDLT<Eigen::MatrixXcd> ldlt(gram);
        if (ldlt.info() != Eigen::Success) {
            ++fallbacks;
            continue;
        }
        const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(ns, ns);
        Eigen::MatrixXcd inv = ldlt.solve(eye);
        // One refinement pass against the unridged Gram removes the bias the
        // ridge leaves in the nulls.
        inv += ldlt.solve(eye - gram0 * inv);
        if (!inv.allFinite() || (eye - gram0 * inv).cwiseAbs().maxCoeff() > 1e-6) {
            ++fallbacks;
            continue;
        }
        const Eigen::MatrixXcd theta = an * inv;
        for (int j = 0; j < ns; ++j) {
            const int t = s[static_cast<size_t>(j)];
            b.col(t) = theta.col(j) *
                       (std::sqrt(static_cast<double>(N - ns) * gamma(static_cast<int>(m), t)) /
                        cn(j));
        }
    }
}

void accumulate_trial(const LargeScaleState& ls, const GroupingState& groups,
                      const ModeAssignment& a, const SystemConfig& config, Rng& rng, Moments& acc) {
    const int M = config.M;
    const int K = config.K;
    const int U = config.U;

    const ChannelRealization real = draw_smallscale(ls, config, rng);
    const EstimatedChannels est = mmse_estimate(real, ls, rng);
    const BeamformerSet prec = build_precoders(est, groups, ls, config);
    const BeamformerSet comb = build_combiners(est, groups, ls, config);
    acc.mr_fallbacks += prec.mr_fallbacks + comb.mr_fallbacks;

    // Downlink users: coherent per-stream coefficients over downlink APs.
    for (int k = 0; k < K; ++k) {
        std::complex<double> own(0.0, 0.0);
        double cross = 0.0;
        for (int kp = 0; kp < K; ++kp) {
            std::complex<double> c(0.0, 0.0);
            for (int m = 0; m < M; ++m) {
                if (!a.a[static_cast<size_t>(m)]) continue;
                c += real.g_dl[static_cast<size_t>(m)].col(k).dot(prec.b_dl[static_cast<size_t>(m)].col(kp));
            }
            if (kp == k)
                own = c;
            else
                cross += std::norm(c);
        }
        double jam = 0.0;
        for (int u = 0; u < U; ++u) {
            std::complex<double> c(0.0, 0.0);
            for (int m = 0; m < M; ++m) {
                if (!a.a[static_cast<size_t>(m)]) continue;
                c += real.g_dl[static_cast<size_t>(m)].col(k).dot(prec.b_jam[static_cast<size_t>(m)].col(u));
            }
            jam += std::norm(c);
        }
        double utx = 0.0;
        for (int u = 0; u < U; ++u) utx += config.rho_u(u) * std::norm(real.g_utx_user(u, k));

        acc.dl_own_sum(k) += own;
        acc.dl_own_sq(k) += std::norm(own);
        acc.dl_cross_sq(k) += cross;
        acc.dl_jam_sq(k) += jam;
        acc.dl_utx_sq(k) += utx;
    }

    // Untrusted receivers.
    for (int u = 0; u < U; ++u) {
        double jam = 0.0;
        for (int up = 0; up < U; ++up) {
            std::complex<double> c(0.0, 0.0);
            for (int m = 0; m < M; ++m) {
                if (!a.a[static_cast<size_t>(m)]) continue;
                c += real.g_jam[static_cast<size_t>(m)].col(u).dot(prec.b_jam[static_cast<size_t>(m)].col(up));
            }
            if (up == u) acc.urx_own_sum(u) += c;
            jam += std::norm(c);
        }
        double dl = 0.0;
        for (int k = 0; k < K; ++k) {
            std::complex<double> c(0.0, 0.0);
            for (int m = 0; m < M; ++m) {
                if (!a.a[static_cast<size_t>(m)]) continue;
                c += real.g_jam[static_cast<size_t>(m)].col(u).dot(prec.b_dl[static_cast<size_t>(m)].col(k));
            }
            dl += std::norm(c);
        }
        double pair = 0.0;
        for (int up = 0; up < U; ++up)
            if (up != u) pair += config.rho_u(up) * std::norm(real.g_pair(up));

        acc.urx_jam_sq(u) += jam;
        acc.urx_dl_sq(u) += dl;
        acc.urx_pair_sq(u) += pair;
    }

    // Observation at the CPU: combined over monitoring APs.
    for (int u = 0; u < U; ++u) {
        double ul = 0.0;
        for (int up = 0; up < U; ++up) {
            std::complex<double> c(0.0, 0.0);
            for (int m = 0; m < M; ++m) {
                if (a.a[static_cast<size_t>(m)]) continue;
                c += comb.v_obs[static_cast<size_t>(m)].col(u).dot(real.g_obs[static_cast<size_t>(m)].col(up));
            }
            if (up == u) acc.obs_own_sum(u) += c;
            ul += config.rho_u(up) * std::norm(c);
        }
        acc.obs_ul_sq(u) += ul;

        // One coherent coefficient per downlink stream, over all
        // (monitoring m, downlink i) AP pairs.
        std::vector<std::complex<double>> stream(static_cast<size_t>(K + U), {0.0, 0.0});
        double noise = 0.0;
        for (int m = 0; m < M; ++m) {
            if (a.a[static_cast<size_t>(m)]) continue;
            const auto v = comb.v_obs[static_cast<size_t>(m)].col(u);
            noise += v.squaredNorm();
            for (int i = 0; i < M; ++i) {
                if (!a.a[static_cast<size_t>(i)]) continue;
                const Eigen::VectorXcd t =
                    real.f_ap[static_cast<size_t>(m * M + i)].adjoint() * v;  // F^H v
                for (int k = 0; k < K; ++k)
                    stream[static_cast<size_t>(k)] += t.dot(prec.b_dl[static_cast<size_t>(i)].col(k));
                for (int up = 0; up < U; ++up)
                    stream[static_cast<size_t>(K + up)] += t.dot(prec.b_jam[static_cast<size_t>(i)].col(up));
            }
        }
        double cross = 0.0;
        for (const auto& c : stream) cross += std::norm(c);
        acc.obs_cross_sq(u) += cross;
        acc.obs_noise_sum(u) += noise;
    }

    acc.n += 1;
}

double chunk_stddev_of_mean(const std::vector<double>& vals) {
    const size_t c = vals.size();
    if (c < 2) return 0.0;
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(c);
    double ss = 0.0;
    for (double v : vals) ss += (v - mean) * (v - mean);
    const double se = std::sqrt(ss / (static_cast<double>(c) * static_cast<double>(c - 1)));
    return std::isfinite(se) ? se : 0.0;
}

}  // namespace

ChannelRealization draw_smallscale(const LargeScaleState& ls, const SystemConfig& config, Rng& rng) {
    const int M = config.M;
    const int N = config.N;
    const int K = config.K;
    const int U = config.U;

    ChannelRealization r;
    r.g_dl.reserve(static_cast<size_t>(M));
    r.g_jam.reserve(static_cast<size_t>(M));
    r.g_obs.reserve(static_cast<size_t>(M));
    for (int m = 0; m < M; ++m) r.g_dl.push_back(draw_matrix(N, ls.beta_dl, m, rng));
    for (int m = 0; m < M; ++m) r.g_jam.push_back(draw_matrix(N, ls.beta_jam, m, rng));
    for (int m = 0; m < M; ++m) r.g_obs.push_back(draw_matrix(N, ls.beta_obs, m, rng));

    r.f_ap.resize(static_cast<size_t>(M) * static_cast<size_t>(M));
    for (int m = 0; m < M; ++m) {
        for (int i = 0; i < M; ++i) {
            if (i == m) continue;
            Eigen::MatrixXcd f(N, N);
            const double b = ls.beta_ap(m, i);
            for (int cc = 0; cc < N; ++cc)
                for (int rr = 0; rr < N; ++rr) f(rr, cc) = rng.cnormal(b);
            r.f_ap[static_cast<size_t>(m * M + i)] = std::move(f);
        }
    }

    r.g_pair.resize(U);
    for (int u = 0; u < U; ++u) r.g_pair(u) = rng.cnormal(ls.beta_pair(u));
    r.g_utx_user.resize(U, K);
    for (int u = 0; u < U; ++u)
        for (int k = 0; k < K; ++k) r.g_utx_user(u, k) = rng.cnormal(ls.beta_utx_user(u, k));
    return r;
}

ChannelRealization draw_smallscale(const LargeScaleState& ls, const SystemConfig& config,
                                   std::uint64_t seed) {
    Rng rng(seed);
    return draw_smallscale(ls, config, rng);
}

EstimatedChannels mmse_estimate(const ChannelRealization& real, const LargeScaleState& ls, Rng& rng) {
    EstimatedChannels est;
    const size_t M = real.g_dl.size();
    est.ghat_dl.reserve(M);
    est.ghat_jam.reserve(M);
    est.ghat_obs.reserve(M);
    for (size_t m = 0; m < M; ++m)
        est.ghat_dl.push_back(estimate_matrix(real.g_dl[m], ls.beta_dl, ls.gamma_dl, static_cast<int>(m), rng));
    for (size_t m = 0; m < M; ++m)
        est.ghat_jam.push_back(
            estimate_matrix(real.g_jam[m], ls.beta_jam, ls.gamma_jam, static_cast<int>(m), rng));
    for (size_t m = 0; m < M; ++m)
        est.ghat_obs.push_back(
            estimate_matrix(real.g_obs[m], ls.beta_obs, ls.gamma_obs, static_cast<int>(m), rng));
    return est;
}

EstimatedChannels mmse_estimate(const ChannelRealization& real, const LargeScaleState& ls,
                                std::uint64_t seed) {
    Rng rng(seed);
    return mmse_estimate(real, ls, rng);
}

BeamformerSet build_precoders(const EstimatedChannels& est, const GroupingState& groups,
                              const LargeScaleState& ls, const SystemConfig& config) {
    BeamformerSet bs;
    role_beamformers(est.ghat_dl, groups.parts.d, ls.gamma_dl, config.N, bs.b_dl, bs.mr_fallbacks);
    role_beamformers(est.ghat_jam, groups.parts.j, ls.gamma_jam, config.N, bs.b_jam, bs.mr_fallbacks);
    return bs;
}

BeamformerSet build_combiners(const EstimatedChannels& est, const GroupingState& groups,
                              const LargeScaleState& ls, const SystemConfig& config) {
    BeamformerSet bs;
    role_beamformers(est.ghat_obs, groups.parts.o, ls.gamma_obs, config.N, bs.v_obs, bs.mr_fallbacks);
    return bs;
}

Eigen::VectorXcd transmit_vector(const BeamformerSet& bs, int m, const SystemConfig& config, Rng& rng) {
    const double scale = std::sqrt(config.eta() * config.rho_d());
    Eigen::VectorXcd x = Eigen::VectorXcd::Zero(config.N);
    for (int k = 0; k < config.K; ++k)
        x += bs.b_dl[static_cast<size_t>(m)].col(k) * rng.cnormal(1.0);
    for (int u = 0; u < config.U; ++u)
        x += bs.b_jam[static_cast<size_t>(m)].col(u) * rng.cnormal(1.0);
    return scale * x;
}

void Moments::init(int K, int U) {
    n = 0;
    mr_fallbacks = 0;
    dl_own_sum = Eigen::VectorXcd::Zero(K);
    dl_own_sq = Eigen::VectorXd::Zero(K);
    dl_cross_sq = Eigen::VectorXd::Zero(K);
    dl_jam_sq = Eigen::VectorXd::Zero(K);
    dl_utx_sq = Eigen::VectorXd::Zero(K);
    urx_own_sum = Eigen::VectorXcd::Zero(U);
    urx_jam_sq = Eigen::VectorXd::Zero(U);
    urx_dl_sq = Eigen::VectorXd::Zero(U);
    urx_pair_sq = Eigen::VectorXd::Zero(U);
    obs_own_sum = Eigen::VectorXcd::Zero(U);
    obs_ul_sq = Eigen::VectorXd::Zero(U);
    obs_cross_sq = Eigen::VectorXd::Zero(U);
    obs_noise_sum = Eigen::VectorXd::Zero(U);
}

void Moments::add(const Moments& o) {
    n += o.n;
    mr_fallbacks += o.mr_fallbacks;
    dl_own_sum += o.dl_own_sum;
    dl_own_sq += o.dl_own_sq;
    dl_cross_sq += o.dl_cross_sq;
    dl_jam_sq += o.dl_jam_sq;
    dl_utx_sq += o.dl_utx_sq;
    urx_own_sum += o.urx_own_sum;
    urx_jam_sq += o.urx_jam_sq;
    urx_dl_sq += o.urx_dl_sq;
    urx_pair_sq += o.urx_pair_sq;
    obs_own_sum += o.obs_own_sum;
    obs_ul_sq += o.obs_ul_sq;
    obs_cross_sq += o.obs_cross_sq;
    obs_noise_sum += o.obs_noise_sum;
}

UatfEstimate uatf_moments(const LargeScaleState& ls, const GroupingState& groups,
                          const ModeAssignment& a, const SystemConfig& config, long long trials,
                          std::uint64_t seed, int jobs) {
    if (trials < 1) throw std::invalid_argument("uatf_moments: trials must be >= 1");
    config.validate();

    std::vector<long long> chunk_trials(kChunks, trials / kChunks);
    const long long rem = trials % kChunks;
    for (long long c = 0; c < rem; ++c) ++chunk_trials[static_cast<size_t>(c)];

    std::vector<Moments> chunk_out(kChunks);
    std::atomic<int> next{0};
    auto worker = [&] {
        for (;;) {
            const int c = next.fetch_add(1);
            if (c >= kChunks) break;
            if (chunk_trials[static_cast<size_t>(c)] == 0) continue;
            Moments acc;
            acc.init(config.K, config.U);
            Rng rng(derive_seed(seed, "mc-chunk", static_cast<std::uint64_t>(c)));
            for (long long t = 0; t < chunk_trials[static_cast<size_t>(c)]; ++t)
                accumulate_trial(ls, groups, a, config, rng, acc);
            chunk_out[static_cast<size_t>(c)] = std::move(acc);
        }
    };

    const int workers = std::max(1, std::min(jobs, kChunks));
    std::vector<std::thread> pool;
    for (int j = 1; j < workers; ++j) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    UatfEstimate est;
    est.total.init(config.K, config.U);
    for (int c = 0; c < kChunks; ++c) {
        if (chunk_trials[static_cast<size_t>(c)] == 0) continue;
        est.total.add(chunk_out[static_cast<size_t>(c)]);
        est.chunks.push_back(std::move(chunk_out[static_cast<size_t>(c)]));
    }
    return est;
}

UatfTermTable table_from_moments(const Moments& m, const LargeScaleState&,
                                 const SystemConfig& config) {
    const int K = config.K;
    const int U = config.U;
    const double eta_rho = config.eta() * config.rho_d();
    const double n = static_cast<double>(std::max<long long>(m.n, 1));

    UatfTermTable t;
    t.trials = m.n;
    t.mr_fallbacks = m.mr_fallbacks;

    t.dl_ds_root.resize(K);
    t.dl_ds.resize(K);
    t.dl_bu.resize(K);
    t.dl_di.resize(K);
    t.dl_ji.resize(K);
    t.dl_ui.resize(K);
    t.dl_sinr.resize(K);
    for (int k = 0; k < K; ++k) {
        const double root = std::abs(m.dl_own_sum(k) / n);
        t.dl_ds_root(k) = root;
        t.dl_ds(k) = eta_rho * root * root;
        t.dl_bu(k) = eta_rho * std::max(m.dl_own_sq(k) / n - root * root, 0.0);
        t.dl_di(k) = eta_rho * m.dl_cross_sq(k) / n;
        t.dl_ji(k) = eta_rho * m.dl_jam_sq(k) / n;
        t.dl_ui(k) = m.dl_utx_sq(k) / n;
        t.dl_sinr(k) = t.dl_ds(k) / (t.dl_bu(k) + t.dl_di(k) + t.dl_ji(k) + t.dl_ui(k) + 1.0);
    }

    t.urx_ui.resize(U);
    t.urx_ji.resize(U);
    t.urx_ji_raw.resize(U);
    t.urx_di.resize(U);
    t.urx_gamma.resize(U);
    for (int u = 0; u < U; ++u) {
        const double own2 = std::norm(m.urx_own_sum(u) / n);
        t.urx_ui(u) = m.urx_pair_sq(u) / n;
        t.urx_ji_raw(u) = eta_rho * m.urx_jam_sq(u) / n;
        t.urx_ji(u) = eta_rho * std::max(m.urx_jam_sq(u) / n - own2, 0.0);
        t.urx_di(u) = eta_rho * m.urx_dl_sq(u) / n;
        t.urx_gamma(u) = t.urx_ui(u) + t.urx_ji(u) + t.urx_di(u) + 1.0;
    }

    t.obs_ds_root.resize(U);
    t.obs_ds.resize(U);
    t.obs_ul_minus_ds.resize(U);
    t.obs_cross_total.resize(U);
    t.obs_cross_per_stream.resize(U);
    t.obs_noise.resize(U);
    t.obs_sinr.resize(U);
    for (int u = 0; u < U; ++u) {
        const double root = std::abs(m.obs_own_sum(u) / n);
        t.obs_ds_root(u) = root;
        t.obs_ds(u) = config.rho_u(u) * root * root;
        t.obs_ul_minus_ds(u) = std::max(m.obs_ul_sq(u) / n - t.obs_ds(u), 0.0);
        t.obs_cross_total(u) = eta_rho * m.obs_cross_sq(u) / n;
        t.obs_cross_per_stream(u) = t.obs_cross_total(u) / static_cast<double>(K + U);
        t.obs_noise(u) = m.obs_noise_sum(u) / n;
        const double den = t.obs_ul_minus_ds(u) + t.obs_cross_total(u) + t.obs_noise(u);
        t.obs_sinr(u) = den > 0.0 ? t.obs_ds(u) / den : 0.0;
    }
    return t;
}

UatfTermTable uatf_terms(const LargeScaleState& ls, const GroupingState& groups,
                         const ModeAssignment& a, const SystemConfig& config, long long trials,
                         std::uint64_t seed, int jobs) {
    const UatfEstimate est = uatf_moments(ls, groups, a, config, trials, seed, jobs);
    return table_from_moments(est.total, ls, config);
}

VerificationReport verify_closed_form(const LargeScaleState& ls, const GroupingState& groups,
                                      const ModeAssignment& a, const SystemConfig& config,
                                      long long trials, double tol, int jobs) {
    const int K = config.K;
    const int U = config.U;
    const double eta_rho = config.eta() * config.rho_d();

    const UatfEstimate est =
        uatf_moments(ls, groups, a, config, trials, derive_seed(config.seed, "verify"), jobs);
    const UatfTermTable table = table_from_moments(est.total, ls, config);
    std::vector<UatfTermTable> chunk_tables;
    chunk_tables.reserve(est.chunks.size());
    for (const Moments& cm : est.chunks) chunk_tables.push_back(table_from_moments(cm, ls, config));

    int n_mo = 0;
    for (int m = 0; m < config.M; ++m)
        if (!a.a[static_cast<size_t>(m)]) ++n_mo;

    // Closed-form building blocks shared by several rows.
    auto jam_beta_sum = [&](int u) {
        double s = 0.0;
        for (int m = 0; m < config.M; ++m)
            if (a.a[static_cast<size_t>(m)]) s += ls.beta_jam(m, u);
        return s;
    };
    auto jam_gamma_sub = [&](int u) {
        double s = 0.0;
        for (int m = 0; m < config.M; ++m)
            if (a.a[static_cast<size_t>(m)])
                s += static_cast<double>(groups.parts.j.strong[static_cast<size_t>(m)].size()) *
                     ls.gamma_jam(m, u);
        return s;
    };
    auto pair_interference = [&](int u) {
        double s = 0.0;
        for (int up = 0; up < U; ++up)
            if (up != u) s += config.rho_u(up) * ls.beta_pair(up);
        return s;
    };
    double ap_cross_printed = 0.0;
    for (int m = 0; m < config.M; ++m) {
        if (a.a[static_cast<size_t>(m)]) continue;
        for (int i = 0; i < config.M; ++i)
            if (a.a[static_cast<size_t>(i)]) ap_cross_printed += ls.beta_ap(m, i);
    }
    ap_cross_printed *= eta_rho;

    auto eq13_denominator_printed = [&](int k) {
        double beta_sum = 0.0;
        double gamma_sub = 0.0;
        for (int m = 0; m < config.M; ++m) {
            if (!a.a[static_cast<size_t>(m)]) continue;
            beta_sum += ls.beta_dl(m, k);
            gamma_sub += static_cast<double>(groups.parts.d.strong[static_cast<size_t>(m)].size()) *
                         ls.gamma_dl(m, k);
        }
        double ui = 0.0;
        for (int u = 0; u < U; ++u) ui += config.rho_u(u) * ls.beta_utx_user(u, k);
        return eta_rho * (static_cast<double>(K + U) * beta_sum - gamma_sub) + ui + 1.0;
    };
    auto eq17_ul_printed = [&](int u) {
        double t1 = 0.0;
        for (int m = 0; m < config.M; ++m) {
            if (a.a[static_cast<size_t>(m)]) continue;
            for (int up = 0; up < U; ++up) t1 += config.rho_u(up) * ls.beta_obs(m, up);
        }
        double gsub = 0.0;
        for (int m : groups.zbar_o[static_cast<size_t>(u)])
            for (int up = 0; up < U; ++up) gsub += config.rho_u(up) * ls.gamma_obs(m, up);
        return t1 - gsub;
    };

    VerificationReport rep;
    rep.trials = trials;
    rep.tol = tol;
    rep.insufficient_samples = trials < 100;
    rep.mr_fallbacks = est.total.mr_fallbacks;

    auto add_row = [&](const std::string& name, double closed,
                       const std::function<double(const UatfTermTable&)>& eval) {
        VerificationRow row;
        row.term = name;
        row.mandatory = name.rfind("disc.", 0) != 0;
        row.closed_form = closed;
        row.empirical = eval(table);
        if (closed != 0.0)
            row.rel_error = std::abs(row.empirical - closed) / std::abs(closed);
        else
            row.rel_error = row.empirical == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
        std::vector<double> vals;
        vals.reserve(chunk_tables.size());
        for (const auto& ct : chunk_tables) vals.push_back(eval(ct));
        row.std_error = chunk_stddev_of_mean(vals);
        row.pass = std::isfinite(row.rel_error) && row.rel_error <= tol;
        if (row.mandatory && !row.pass) rep.mandatory_pass = false;
        rep.rows.push_back(std::move(row));
    };

    for (int k = 0; k < K; ++k) {
        add_row("eq13.ds_root.k" + std::to_string(k), downlink_numerator_root(k, ls, groups, config),
                [k](const UatfTermTable& t) { return t.dl_ds_root(k); });
        add_row("eq13.composite.k" + std::to_string(k), sinr_downlink_user(k, ls, groups, a, config),
                [k](const UatfTermTable& t) { return t.dl_sinr(k); });
    }

    for (int u = 0; u < U; ++u) {
        add_row("eq15.ui.u" + std::to_string(u), pair_interference(u),
                [u](const UatfTermTable& t) { return t.urx_ui(u); });
        add_row("eq15.ji.u" + std::to_string(u),
                eta_rho * (static_cast<double>(U) * jam_beta_sum(u) - jam_gamma_sub(u)),
                [u](const UatfTermTable& t) { return t.urx_ji(u); });
        add_row("eq15.di.u" + std::to_string(u), eta_rho * static_cast<double>(K) * jam_beta_sum(u),
                [u](const UatfTermTable& t) { return t.urx_di(u); });
        add_row("eq15.gamma.u" + std::to_string(u), untrusted_rx_denominator(u, ls, groups, a, config),
                [u](const UatfTermTable& t) { return t.urx_gamma(u); });
    }

    if (n_mo > 0) {
        for (int u = 0; u < U; ++u) {
            const double root = observation_numerator_root(u, ls, groups, config);
            add_row("eq17.numerator.u" + std::to_string(u), config.rho_u(u) * root * root,
                    [u](const UatfTermTable& t) { return t.obs_ds(u); });
            add_row("eq17.ap_cross_per_stream.u" + std::to_string(u), ap_cross_printed,
                    [u](const UatfTermTable& t) { return t.obs_cross_per_stream(u); });
            add_row("eq17.noise.u" + std::to_string(u), static_cast<double>(n_mo),
                    [u](const UatfTermTable& t) { return t.obs_noise(u); });
        }

        // Report-only rows: printed-formula discrepancies, measured.
        for (int u = 0; u < U; ++u) {
            add_row("disc.eq17.ul_denominator.u" + std::to_string(u), eq17_ul_printed(u),
                    [u](const UatfTermTable& t) { return t.obs_ul_minus_ds(u); });
            add_row("disc.eq17.ap_cross_total.u" + std::to_string(u), ap_cross_printed,
                    [u](const UatfTermTable& t) { return t.obs_cross_total(u); });
            add_row("disc.eq17.composite.u" + std::to_string(u),
                    sinr_observation(u, ls, groups, a, config),
                    [u](const UatfTermTable& t) { return t.obs_sinr(u); });
        }
    }

    for (int k = 0; k < K; ++k)
        add_row("disc.eq13.denominator.k" + std::to_string(k), eq13_denominator_printed(k),
                [k](const UatfTermTable& t) {
                    return t.dl_bu(k) + t.dl_di(k) + t.dl_ji(k) + t.dl_ui(k) + 1.0;
                });
    for (int u = 0; u < U; ++u)
        add_row("disc.eq15.ji_raw.u" + std::to_string(u),
                eta_rho * (static_cast<double>(U) * jam_beta_sum(u) - jam_gamma_sub(u)),
                [u](const UatfTermTable& t) { return t.urx_ji_raw(u); });

    return rep;
}

std::string verification_to_csv(const VerificationReport& report) {
    std::string out = "term,closed_form,empirical,rel_error,std_error,pass\n";
    char buf[256];
    for (const auto& row : report.rows) {
        std::snprintf(buf, sizeof buf, "%s,%.12g,%.12g,%.12g,%.12g,%d\n", row.term.c_str(),
                      row.closed_form, row.empirical, row.rel_error, row.std_error, row.pass ? 1 : 0);
        out += buf;
    }
    return out;
}

double empirical_msp(double sinr_obs, double gamma_u, double rho_u, double beta_pair_u,
                     long long trials, std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("empirical_msp: trials must be >= 1");
    if (!(rho_u > 0.0) || !(beta_pair_u > 0.0))
        throw std::domain_error("empirical_msp: rho_u and beta_pair_u must be positive");
    Rng rng(seed);
    long long hits = 0;
    for (long long t = 0; t < trials; ++t) {
        const double g2 = rng.exponential(beta_pair_u);
        if (sinr_obs >= rho_u * g2 / gamma_u) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(trials);
}

}  // namespace jcam::mc
