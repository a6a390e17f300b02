// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "perf.hpp"
#include "rng.hpp"

using namespace jcam;

namespace {

// One AP, one downlink user, no untrusted pairs; beta/gamma set by hand.
struct SingleUserFixture {
    SystemConfig cfg;
    LargeScaleState ls;
    ModeAssignment a;

    SingleUserFixture(double beta, double gamma, int N) {
        cfg.M = 1;
        cfg.N = N;
        cfg.K = 1;
        cfg.U = 0;
        cfg.tau = 1;
        cfg.validate();

        ls.beta_dl.resize(1, 1);
        ls.beta_dl(0, 0) = beta;
        ls.gamma_dl.resize(1, 1);
        ls.gamma_dl(0, 0) = gamma;
        ls.beta_jam.resize(1, 0);
        ls.gamma_jam.resize(1, 0);
        ls.beta_obs.resize(1, 0);
        ls.gamma_obs.resize(1, 0);
        ls.beta_ap = Eigen::MatrixXd::Zero(1, 1);
        ls.beta_pair.resize(0);
        ls.beta_utx_user.resize(0, 1);

        a.a = {1};
    }

    // Partitions with the single user forced weak (pure MR).
    GroupingState mr_groups() const {
        ApPartitions parts;
        parts.d.strong = {{}};
        parts.d.weak = {{0}};
        parts.d.is_strong = {{0}};
        parts.j.strong = {{}};
        parts.j.weak = {{}};
        parts.j.is_strong = {{}};
        parts.o = parts.j;
        return build_groups(parts, a, 1, 0);
    }
};

// One monitoring AP observing one untrusted pair, no users.
struct SingleObsFixture {
    SystemConfig cfg;
    LargeScaleState ls;
    ModeAssignment a;

    SingleObsFixture(double beta_obs, double gamma_obs, int N) {
        cfg.M = 1;
        cfg.N = N;
        cfg.K = 0;
        cfg.U = 1;
        cfg.p_untrusted_watts = {0.2};
        cfg.tau = 1;
        cfg.validate();

        ls.beta_dl.resize(1, 0);
        ls.gamma_dl.resize(1, 0);
        ls.beta_jam.resize(1, 1);
        ls.beta_jam(0, 0) = 1e-9;
        ls.gamma_jam.resize(1, 1);
        ls.gamma_jam(0, 0) = 5e-10;
        ls.beta_obs.resize(1, 1);
        ls.beta_obs(0, 0) = beta_obs;
        ls.gamma_obs.resize(1, 1);
        ls.gamma_obs(0, 0) = gamma_obs;
        ls.beta_ap = Eigen::MatrixXd::Zero(1, 1);
        ls.beta_pair.resize(1);
        ls.beta_pair(0) = 4e-10;
        ls.beta_utx_user.resize(1, 0);

        a.a = {0};
    }

    GroupingState mr_groups() const {
        ApPartitions parts;
        parts.d.strong = {{}};
        parts.d.weak = {{}};
        parts.d.is_strong = {{}};
        parts.j.strong = {{}};
        parts.j.weak = {{0}};
        parts.j.is_strong = {{0}};
        parts.o = parts.j;
        return build_groups(parts, a, 0, 1);
    }
};

SystemConfig drop_config() {
    SystemConfig cfg;
    cfg.M = 6;
    cfg.N = 4;
    cfg.K = 3;
    cfg.U = 2;
    cfg.p_untrusted_watts = {0.2, 0.2};
    cfg.tau = cfg.K + cfg.U;
    return cfg;
}

}  // namespace

TEST_CASE("MR single-user SINR matches the symbolic form") {
    const double beta = 3e-10;
    const double gamma = 2e-10;
    SingleUserFixture fx(beta, gamma, 4);
    const GroupingState g = fx.mr_groups();
    const double rho = fx.cfg.rho_d();
    // eta = 1/(K+U) = 1 here.
    const double want = rho * 4.0 * gamma / (rho * beta + 1.0);
    CHECK(sinr_downlink_user(0, fx.ls, g, fx.a, fx.cfg) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("PZF single-user SINR matches the symbolic form") {
    const double beta = 3e-10;
    const double gamma = 2e-10;
    SingleUserFixture fx(beta, gamma, 4);
    // Natural grouping makes the lone user strong (share 1 >= threshold).
    const GroupingState g = build_groups(fx.ls, fx.a, fx.cfg);
    REQUIRE(g.parts.d.strong[0].size() == 1);
    const double rho = fx.cfg.rho_d();
    const double want = rho * 3.0 * gamma / (rho * (beta - gamma) + 1.0);
    CHECK(sinr_downlink_user(0, fx.ls, g, fx.a, fx.cfg) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("no downlink APs means zero downlink SINR") {
    SingleUserFixture fx(3e-10, 2e-10, 4);
    fx.a.a = {0};
    const GroupingState g = build_groups(fx.ls, fx.a, fx.cfg);
    CHECK(sinr_downlink_user(0, fx.ls, g, fx.a, fx.cfg) == 0.0);
}

TEST_CASE("SE prefactor worked values") {
    SystemConfig cfg = drop_config();
    cfg.T = 200;
    cfg.tau = 100;  // tau = T/2
    CHECK(se_from_sinr(0.0, cfg) == 0.0);
    CHECK(se_from_sinr(1.0, cfg) == doctest::Approx(0.5).epsilon(1e-12));
    cfg.tau = 20;
    CHECK(se_from_sinr(3.0, cfg) == doctest::Approx(1.8).epsilon(1e-12));
}

TEST_CASE("MR single-observer SINR matches the symbolic form") {
    const double beta = 6e-10;
    const double gamma = 4e-10;
    SingleObsFixture fx(beta, gamma, 5);
    const GroupingState g = fx.mr_groups();
    const double rho = fx.cfg.rho_u(0);
    const double want = rho * 5.0 * gamma / (rho * (beta - gamma) + 1.0);
    CHECK(sinr_observation(0, fx.ls, g, fx.a, fx.cfg) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("untrusted receiver denominator is 1 without downlink APs") {
    SingleObsFixture fx(6e-10, 4e-10, 5);
    const GroupingState g = build_groups(fx.ls, fx.a, fx.cfg);
    CHECK(untrusted_rx_denominator(0, fx.ls, g, fx.a, fx.cfg) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("turning an AP to downlink increases the jamming denominator") {
    SystemConfig cfg = drop_config();
    const Layout layout = place_nodes(cfg, 21);
    const LargeScaleState ls = build_large_scale(layout, cfg, 21);

    ModeAssignment before;
    before.a = {0, 0, 0, 0, 0, 0};
    ModeAssignment after = before;
    after.a[2] = 1;
    const GroupingState gb = build_groups(ls, before, cfg);
    const GroupingState ga = build_groups(ls, after, cfg);
    for (int u = 0; u < cfg.U; ++u) {
        const double d0 = untrusted_rx_denominator(u, ls, gb, before, cfg);
        const double d1 = untrusted_rx_denominator(u, ls, ga, after, cfg);
        CHECK(d1 > d0);
    }
}

TEST_CASE("msp worked values and guards") {
    CHECK(msp(0.0, 5.0, 2.0, 3.0) == 0.0);
    // sinr*gamma/(rho*beta) = ln 2 gives exactly one half.
    CHECK(msp(std::log(2.0), 1.0, 1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(msp(2.0 * std::log(2.0), 3.0, 2.0, 3.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS(msp(1.0, 1.0, 1.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(msp(1.0, 1.0, 0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(msp(-1.0, 1.0, 1.0, 1.0), std::domain_error);
}

TEST_CASE("msp monotonicity") {
    const double base = msp(1.0, 2.0, 1.5, 3.0);
    CHECK(msp(1.2, 2.0, 1.5, 3.0) > base);
    CHECK(msp(1.0, 2.4, 1.5, 3.0) > base);
    CHECK(msp(1.0, 2.0, 1.5, 3.6) < base);
}

TEST_CASE("evaluate: degenerate mode vectors and empty-min conventions") {
    SingleObsFixture fx(6e-10, 4e-10, 5);

    // All monitoring: K = 0 so min_se is +inf, observation active.
    const GroupingState g0 = build_groups(fx.ls, fx.a, fx.cfg);
    const PerformanceReport r0 = evaluate(fx.ls, g0, fx.a, fx.cfg);
    CHECK(std::isinf(r0.min_se));
    CHECK(r0.min_se > 0.0);
    CHECK(r0.sinr_obs(0) > 0.0);
    CHECK(r0.msp(0) > 0.0);

    // All downlink: no monitoring APs, observation SINR and MSP collapse.
    ModeAssignment dl;
    dl.a = {1};
    const GroupingState g1 = build_groups(fx.ls, dl, fx.cfg);
    const PerformanceReport r1 = evaluate(fx.ls, g1, dl, fx.cfg);
    CHECK(r1.sinr_obs(0) == 0.0);
    CHECK(r1.msp(0) == 0.0);
    CHECK(r1.min_msp == 0.0);

    // U = 0: min_msp is +inf.
    SingleUserFixture su(3e-10, 2e-10, 4);
    const GroupingState g2 = build_groups(su.ls, su.a, su.cfg);
    const PerformanceReport r2 = evaluate(su.ls, g2, su.a, su.cfg);
    CHECK(std::isinf(r2.min_msp));
    CHECK(r2.min_se == doctest::Approx(r2.se_dl(0)).epsilon(1e-12));
}

TEST_CASE("report invariants over random drops and mode vectors") {
    SystemConfig cfg = drop_config();
    Rng rng(derive_seed(404, "perf-prop"));
    for (int drop = 0; drop < 100; ++drop) {
        const std::uint64_t seed = derive_seed(505, "perf-drop", drop);
        const Layout layout = place_nodes(cfg, seed);
        const LargeScaleState ls = build_large_scale(layout, cfg, seed);
        ModeAssignment a;
        a.a.resize(static_cast<size_t>(cfg.M));
        for (auto& bit : a.a) bit = static_cast<std::uint8_t>(rng.below(2));
        const GroupingState g = build_groups(ls, a, cfg);
        const PerformanceReport r = evaluate(ls, g, a, cfg);

        double min_se = std::numeric_limits<double>::infinity();
        for (int k = 0; k < cfg.K; ++k) {
            CHECK(r.sinr_dl(k) >= 0.0);
            CHECK(r.se_dl(k) == doctest::Approx(se_from_sinr(r.sinr_dl(k), cfg)).epsilon(1e-12));
            CHECK(r.se_dl(k) <= std::log2(1.0 + r.sinr_dl(k)) + 1e-15);
            min_se = std::min(min_se, r.se_dl(k));
        }
        CHECK(r.min_se == doctest::Approx(min_se).epsilon(1e-12));

        double min_msp = std::numeric_limits<double>::infinity();
        for (int u = 0; u < cfg.U; ++u) {
            CHECK(r.sinr_obs(u) >= 0.0);
            CHECK(r.gamma_u_denom(u) >= 1.0);
            CHECK(r.msp(u) >= 0.0);
            CHECK(r.msp(u) <= 1.0);
            min_msp = std::min(min_msp, r.msp(u));
        }
        CHECK(r.min_msp == doctest::Approx(min_msp).epsilon(1e-12));

        // Pure function: same inputs, same outputs.
        const PerformanceReport r2 = evaluate(ls, g, a, cfg);
        CHECK(r.min_se == r2.min_se);
        CHECK(r.min_msp == r2.min_msp);
    }
}

TEST_CASE("report CSV shape") {
    SystemConfig cfg = drop_config();
    const Layout layout = place_nodes(cfg, 3);
    const LargeScaleState ls = build_large_scale(layout, cfg, 3);
    ModeAssignment a;
    a.a = {1, 1, 1, 0, 0, 0};
    const GroupingState g = build_groups(ls, a, cfg);
    const PerformanceReport r = evaluate(ls, g, a, cfg);
    const std::string csv = report_to_csv(r);

    std::istringstream in(csv);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "kind,index,sinr_dl,se_dl,gamma_u,sinr_obs,msp");
    int rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == cfg.K + cfg.U);
}
