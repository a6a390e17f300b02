// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <stdexcept>

#include "estimation.hpp"
#include "mc.hpp"

using namespace jcam;

namespace {

SystemConfig tiny_config() {
    SystemConfig cfg;
    cfg.M = 2;
    cfg.N = 4;
    cfg.K = 2;
    cfg.U = 1;
    cfg.p_untrusted_watts = {0.2};
    cfg.tau = 3;
    return cfg;
}

LargeScaleState tiny_drop(const SystemConfig& cfg, std::uint64_t seed) {
    return build_large_scale(place_nodes(cfg, seed), cfg, seed);
}

const mc::VerificationRow* find_row(const mc::VerificationReport& rep, const std::string& term) {
    for (const auto& r : rep.rows)
        if (r.term == term) return &r;
    return nullptr;
}

}  // namespace

TEST_CASE("channel draws match the large-scale variances") {
    SystemConfig cfg = tiny_config();
    LargeScaleState ls = tiny_drop(cfg, 2);

    const int draws = 100000;
    Rng rng(derive_seed(1, "draw-var"));
    double sq = 0.0, re_sq = 0.0, im_sq = 0.0;
    std::complex<double> mean(0.0, 0.0);
    double pair_sq = 0.0;
    for (int i = 0; i < draws; ++i) {
        const mc::ChannelRealization ch = mc::draw_smallscale(ls, cfg, rng);
        const std::complex<double> v = ch.g_dl[0](0, 0);
        sq += std::norm(v);
        re_sq += v.real() * v.real();
        im_sq += v.imag() * v.imag();
        mean += v;
        pair_sq += std::norm(ch.g_pair(0));
    }
    const double beta = ls.beta_dl(0, 0);
    CHECK(sq / draws == doctest::Approx(beta).epsilon(0.02));
    // Circular symmetry: each part carries half the power.
    CHECK(re_sq / draws == doctest::Approx(beta / 2.0).epsilon(0.05));
    CHECK(im_sq / draws == doctest::Approx(beta / 2.0).epsilon(0.05));
    CHECK(std::abs(mean) / draws < 3.0 * std::sqrt(beta / draws));
    CHECK(pair_sq / draws == doctest::Approx(ls.beta_pair(0)).epsilon(0.05));
}

TEST_CASE("zero beta draws a zero channel") {
    SystemConfig cfg = tiny_config();
    LargeScaleState ls = tiny_drop(cfg, 2);
    ls.beta_dl(1, 1) = 0.0;
    ls.gamma_dl(1, 1) = 0.0;
    Rng rng(7);
    const mc::ChannelRealization ch = mc::draw_smallscale(ls, cfg, rng);
    CHECK(ch.g_dl[1].col(1).isZero(0.0));
    CHECK(!ch.g_dl[1].col(0).isZero(0.0));

    const mc::EstimatedChannels est = mc::mmse_estimate(ch, ls, rng);
    CHECK(est.ghat_dl[1].col(1).isZero(0.0));
}

TEST_CASE("estimates carry variance gamma and are orthogonal to the error") {
    SystemConfig cfg = tiny_config();
    const LargeScaleState ls = tiny_drop(cfg, 4);

    const int draws = 100000;
    Rng rng(derive_seed(2, "est-var"));
    double ghat_sq = 0.0, err_sq = 0.0;
    std::complex<double> cross(0.0, 0.0);
    for (int i = 0; i < draws; ++i) {
        const mc::ChannelRealization ch = mc::draw_smallscale(ls, cfg, rng);
        const mc::EstimatedChannels est = mc::mmse_estimate(ch, ls, rng);
        const std::complex<double> gh = est.ghat_dl[0](1, 0);
        const std::complex<double> er = ch.g_dl[0](1, 0) - gh;
        ghat_sq += std::norm(gh);
        err_sq += std::norm(er);
        cross += gh * std::conj(er);
    }
    const double gamma = ls.gamma_dl(0, 0);
    const double beta = ls.beta_dl(0, 0);
    CHECK(ghat_sq / draws == doctest::Approx(gamma).epsilon(0.02));
    CHECK(err_sq / draws == doctest::Approx(beta - gamma).epsilon(0.02));
    const double corr = std::abs(cross) / std::sqrt(ghat_sq * err_sq);
    CHECK(corr < 0.02);
}

TEST_CASE("estimation is asymptotically perfect at high pilot SNR") {
    SystemConfig cfg;
    cfg.M = 1;
    cfg.N = 8;
    cfg.K = 1;
    cfg.U = 1;
    cfg.p_untrusted_watts = {0.2};
    cfg.tau = 2;

    LargeScaleState ls = tiny_drop(cfg, 5);
    ls.beta_dl(0, 0) = 1.0;
    ls.gamma_dl(0, 0) = mmse_quality(1.0, 1e6, 1.0);  // tau*rho = 1e6

    Rng rng(derive_seed(3, "asymptote"));
    double rel = 0.0;
    const int draws = 2000;
    for (int i = 0; i < draws; ++i) {
        const mc::ChannelRealization ch = mc::draw_smallscale(ls, cfg, rng);
        const mc::EstimatedChannels est = mc::mmse_estimate(ch, ls, rng);
        rel += (ch.g_dl[0].col(0) - est.ghat_dl[0].col(0)).norm() / ch.g_dl[0].col(0).norm();
    }
    CHECK(rel / draws < 0.01);
}

TEST_CASE("PZF precoders null the other strong estimates") {
    // One AP, three forced-strong users: every pair must null.
    SystemConfig cfg;
    cfg.M = 1;
    cfg.N = 6;
    cfg.K = 3;
    cfg.U = 1;
    cfg.p_untrusted_watts = {0.2};
    cfg.tau = 4;

    LargeScaleState ls = tiny_drop(cfg, 6);
    ModeAssignment a;
    a.a = {1};
    ApPartitions parts = build_ap_partitions(ls, cfg);
    parts.d.strong = {{0, 1, 2}};
    parts.d.weak = {{}};
    parts.d.is_strong = {{1, 1, 1}};
    const GroupingState groups = build_groups(parts, a, cfg.K, cfg.U);

    Rng rng(derive_seed(4, "pzf-null"));
    for (int trial = 0; trial < 50; ++trial) {
        const mc::ChannelRealization ch = mc::draw_smallscale(ls, cfg, rng);
        const mc::EstimatedChannels est = mc::mmse_estimate(ch, ls, rng);
        const mc::BeamformerSet bs = mc::build_precoders(est, groups, ls, cfg);
        REQUIRE(bs.mr_fallbacks == 0);
        for (int k = 0; k < 3; ++k)
            for (int kp = 0; kp < 3; ++kp) {
                if (k == kp) continue;
                const auto dot = est.ghat_dl[0].col(kp).dot(bs.b_dl[0].col(k));
                const double scale = est.ghat_dl[0].col(kp).norm() * bs.b_dl[0].col(k).norm();
                CHECK(std::abs(dot) <= 1e-10 * scale);
            }
    }
}

TEST_CASE("precoder power normalizations") {
    // Forced-weak user gives the MR column; forced-strong gives PZF.
    SystemConfig cfg;
    cfg.M = 1;
    cfg.N = 4;
    cfg.K = 2;
    cfg.U = 1;
    cfg.p_untrusted_watts = {0.2};
    cfg.tau = 3;

    const LargeScaleState ls = tiny_drop(cfg, 8);
    ModeAssignment a;
    a.a = {1};
    ApPartitions parts = build_ap_partitions(ls, cfg);
    parts.d.strong = {{1}};
    parts.d.weak = {{0}};
    parts.d.is_strong = {{0, 1}};
    const GroupingState groups = build_groups(parts, a, cfg.K, cfg.U);

    Rng rng(derive_seed(5, "norm"));
    const int draws = 100000;
    double mr_sq = 0.0, pzf_sq = 0.0;
    for (int i = 0; i < draws; ++i) {
        const mc::ChannelRealization ch = mc::draw_smallscale(ls, cfg, rng);
        const mc::EstimatedChannels est = mc::mmse_estimate(ch, ls, rng);
        const mc::BeamformerSet bs = mc::build_precoders(est, groups, ls, cfg);
        mr_sq += bs.b_dl[0].col(0).squaredNorm();
        pzf_sq += bs.b_dl[0].col(1).squaredNorm();
    }
    CHECK(mr_sq / draws == doctest::Approx(1.0).epsilon(0.01));
    CHECK(pzf_sq / draws == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("transmitted power equals rho_d") {
    SystemConfig cfg = tiny_config();
    const LargeScaleState ls = tiny_drop(cfg, 9);
    ModeAssignment a;
    a.a = {1, 1};
    const GroupingState groups = build_groups(ls, a, cfg);

    Rng rng(derive_seed(6, "txpow"));
    // PZF norm per draw is heavy-tailed at small N-|S|, so the mean needs
    // room: 4e4 draws puts the standard error near 0.5%.
    const int draws = 40000;
    double pow_sum = 0.0;
    for (int i = 0; i < draws; ++i) {
        const mc::ChannelRealization ch = mc::draw_smallscale(ls, cfg, rng);
        const mc::EstimatedChannels est = mc::mmse_estimate(ch, ls, rng);
        const mc::BeamformerSet bs = mc::build_precoders(est, groups, ls, cfg);
        pow_sum += mc::transmit_vector(bs, 0, cfg, rng).squaredNorm();
    }
    CHECK(pow_sum / draws == doctest::Approx(cfg.rho_d()).epsilon(0.02));
}

TEST_CASE("combiner coherent gains match the closed-form roots") {
    // Forced-weak -> MR: E{v^H g} = sqrt(N*gamma); forced-strong -> PZF:
    // E{v^H g} = sqrt((N-|S|)*gamma).
    SystemConfig cfg;
    cfg.M = 1;
    cfg.N = 5;
    cfg.K = 1;
    cfg.U = 2;
    cfg.p_untrusted_watts = {0.2, 0.2};
    cfg.tau = 3;

    const LargeScaleState ls = tiny_drop(cfg, 10);
    ModeAssignment a;
    a.a = {0};
    ApPartitions parts = build_ap_partitions(ls, cfg);
    parts.o.strong = {{1}};
    parts.o.weak = {{0}};
    parts.o.is_strong = {{0, 1}};
    const GroupingState groups = build_groups(parts, a, cfg.K, cfg.U);

    Rng rng(derive_seed(7, "comb"));
    const int draws = 100000;
    std::complex<double> mr_gain(0.0, 0.0), pzf_gain(0.0, 0.0);
    for (int i = 0; i < draws; ++i) {
        const mc::ChannelRealization ch = mc::draw_smallscale(ls, cfg, rng);
        const mc::EstimatedChannels est = mc::mmse_estimate(ch, ls, rng);
        const mc::BeamformerSet bs = mc::build_combiners(est, groups, ls, cfg);
        mr_gain += bs.v_obs[0].col(0).dot(ch.g_obs[0].col(0));
        pzf_gain += bs.v_obs[0].col(1).dot(ch.g_obs[0].col(1));
    }
    const double want_mr = std::sqrt(5.0 * ls.gamma_obs(0, 0));
    const double want_pzf = std::sqrt(4.0 * ls.gamma_obs(0, 1));
    CHECK(std::abs(mr_gain / double(draws)) == doctest::Approx(want_mr).epsilon(0.02));
    CHECK(std::abs(pzf_gain / double(draws)) == doctest::Approx(want_pzf).epsilon(0.02));
}

TEST_CASE("term table zeroes downlink terms without downlink APs") {
    SystemConfig cfg = tiny_config();
    const LargeScaleState ls = tiny_drop(cfg, 11);
    ModeAssignment a;
    a.a = {0, 0};
    const GroupingState groups = build_groups(ls, a, cfg);
    const mc::UatfTermTable t = mc::uatf_terms(ls, groups, a, cfg, 200, 99);
    for (int k = 0; k < cfg.K; ++k) {
        CHECK(t.dl_ds(k) == 0.0);
        CHECK(t.dl_bu(k) == 0.0);
        CHECK(t.dl_di(k) == 0.0);
        CHECK(t.dl_ji(k) == 0.0);
        CHECK(t.dl_sinr(k) == 0.0);
    }
    // No downlink APs: the jamming denominator reduces to UI + 1.
    CHECK(t.urx_ji(0) == 0.0);
    CHECK(t.urx_di(0) == 0.0);
}

TEST_CASE("observation noise power counts the monitoring APs") {
    SystemConfig cfg = tiny_config();
    const LargeScaleState ls = tiny_drop(cfg, 12);
    ModeAssignment a;
    a.a = {1, 0};
    const GroupingState groups = build_groups(ls, a, cfg);
    const mc::UatfTermTable t = mc::uatf_terms(ls, groups, a, cfg, 4000, 100);
    CHECK(t.obs_noise(0) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("downlink DS root matches the closed form on one AP") {
    SystemConfig cfg;
    cfg.M = 1;
    cfg.N = 4;
    cfg.K = 1;
    cfg.U = 1;
    cfg.p_untrusted_watts = {0.2};
    cfg.tau = 2;
    const LargeScaleState ls = tiny_drop(cfg, 13);
    ModeAssignment a;
    a.a = {1};
    const GroupingState groups = build_groups(ls, a, cfg);
    const mc::UatfTermTable t = mc::uatf_terms(ls, groups, a, cfg, 20000, 101);
    const double want = downlink_numerator_root(0, ls, groups, cfg);
    CHECK(t.dl_ds_root(0) == doctest::Approx(want).epsilon(0.02));
}

TEST_CASE("verification passes on a small config") {
    SystemConfig cfg;
    cfg.M = 4;
    cfg.N = 6;
    cfg.K = 2;
    cfg.U = 1;
    cfg.p_untrusted_watts = {0.2};
    cfg.tau = 3;
    // Drop pinned where every mandatory ratio sits well inside the tolerance
    // at this trial count.
    cfg.seed = 7;
    const LargeScaleState ls = tiny_drop(cfg, cfg.seed);
    ModeAssignment a;
    a.a = {1, 1, 0, 0};
    const GroupingState groups = build_groups(ls, a, cfg);

    const mc::VerificationReport rep = mc::verify_closed_form(ls, groups, a, cfg, 4000, 0.08);
    CHECK(rep.mandatory_pass);
    CHECK(!rep.insufficient_samples);
    CHECK(rep.trials == 4000);

    // Mandatory identities and report-only discrepancy rows are all present.
    for (const char* term : {"eq13.ds_root.k0", "eq13.composite.k1", "eq15.ui.u0", "eq15.ji.u0",
                             "eq15.di.u0", "eq15.gamma.u0", "eq17.numerator.u0",
                             "eq17.ap_cross_per_stream.u0", "eq17.noise.u0"}) {
        const mc::VerificationRow* row = find_row(rep, term);
        REQUIRE(row != nullptr);
        CHECK(row->mandatory);
        CHECK(row->pass);
    }
    for (const char* term : {"disc.eq17.ul_denominator.u0", "disc.eq17.ap_cross_total.u0",
                             "disc.eq17.composite.u0", "disc.eq13.denominator.k0",
                             "disc.eq15.ji_raw.u0"}) {
        const mc::VerificationRow* row = find_row(rep, term);
        REQUIRE(row != nullptr);
        CHECK(!row->mandatory);
    }
}

TEST_CASE("verification flags a single trial as insufficient") {
    SystemConfig cfg = tiny_config();
    const LargeScaleState ls = tiny_drop(cfg, 14);
    ModeAssignment a;
    a.a = {1, 0};
    const GroupingState groups = build_groups(ls, a, cfg);
    const mc::VerificationReport rep = mc::verify_closed_form(ls, groups, a, cfg, 1, 0.05);
    CHECK(rep.insufficient_samples);
}

TEST_CASE("doubling trials shrinks the DS standard error by about sqrt(2)") {
    SystemConfig cfg = tiny_config();
    cfg.seed = 21;
    const LargeScaleState ls = tiny_drop(cfg, cfg.seed);
    ModeAssignment a;
    a.a = {1, 0};
    const GroupingState groups = build_groups(ls, a, cfg);

    const mc::VerificationReport r1 = mc::verify_closed_form(ls, groups, a, cfg, 4000, 0.2);
    const mc::VerificationReport r2 = mc::verify_closed_form(ls, groups, a, cfg, 8000, 0.2);
    const mc::VerificationRow* a1 = find_row(r1, "eq13.ds_root.k0");
    const mc::VerificationRow* a2 = find_row(r2, "eq13.ds_root.k0");
    REQUIRE(a1 != nullptr);
    REQUIRE(a2 != nullptr);
    REQUIRE(a1->std_error > 0.0);
    const double ratio = a2->std_error / a1->std_error;
    const double want = 1.0 / std::sqrt(2.0);
    CHECK(ratio > want * 0.8);
    CHECK(ratio < want * 1.2);
}

TEST_CASE("verification is deterministic and jobs-invariant") {
    SystemConfig cfg = tiny_config();
    cfg.seed = 33;
    const LargeScaleState ls = tiny_drop(cfg, cfg.seed);
    ModeAssignment a;
    a.a = {1, 0};
    const GroupingState groups = build_groups(ls, a, cfg);

    const mc::VerificationReport r1 = mc::verify_closed_form(ls, groups, a, cfg, 1500, 0.1, 1);
    const mc::VerificationReport r2 = mc::verify_closed_form(ls, groups, a, cfg, 1500, 0.1, 4);
    CHECK(mc::verification_to_csv(r1) == mc::verification_to_csv(r2));

    const mc::UatfEstimate e1 = mc::uatf_moments(ls, groups, a, cfg, 1000, 77, 1);
    const mc::UatfEstimate e3 = mc::uatf_moments(ls, groups, a, cfg, 1000, 77, 3);
    CHECK(e1.total.n == e3.total.n);
    CHECK(e1.total.dl_own_sum == e3.total.dl_own_sum);
    CHECK(e1.total.obs_ul_sq == e3.total.obs_ul_sq);
    CHECK(e1.chunks.size() == e3.chunks.size());
}

TEST_CASE("trial-count guards") {
    SystemConfig cfg = tiny_config();
    const LargeScaleState ls = tiny_drop(cfg, 15);
    ModeAssignment a;
    a.a = {1, 0};
    const GroupingState groups = build_groups(ls, a, cfg);
    CHECK_THROWS_AS(mc::uatf_moments(ls, groups, a, cfg, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(mc::empirical_msp(1.0, 1.0, 1.0, 1.0, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(mc::empirical_msp(1.0, 1.0, 0.0, 1.0, 100, 1), std::domain_error);
    CHECK_THROWS_AS(mc::empirical_msp(1.0, 1.0, 1.0, 0.0, 100, 1), std::domain_error);
}

TEST_CASE("empirical MSP agrees with the closed form") {
    CHECK(mc::empirical_msp(0.0, 2.0, 1.0, 3.0, 1000, 5) == 0.0);

    // Tuned tuple: sinr*gamma/(rho*beta) = ln 2 -> exactly one half.
    const double half = mc::empirical_msp(std::log(2.0), 1.0, 1.0, 1.0, 100000, 6);
    CHECK(std::abs(half - 0.5) <= 0.01);

    Rng rng(derive_seed(8, "msp-tuples"));
    for (int i = 0; i < 20; ++i) {
        const double sinr = rng.uniform(0.05, 4.0);
        const double gamma = rng.uniform(0.5, 5.0);
        const double rho = rng.uniform(0.5, 5.0);
        const double beta = rng.uniform(0.5, 5.0);
        const double closed = msp(sinr, gamma, rho, beta);
        const double emp = mc::empirical_msp(sinr, gamma, rho, beta, 100000, derive_seed(9, "msp", i));
        CHECK(std::abs(emp - closed) <= 0.01);
    }
}
