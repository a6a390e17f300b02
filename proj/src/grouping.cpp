// SPDX-License-Identifier: Apache-2.0

#include "grouping.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace jcam {

int ModeAssignment::downlink_count() const {
    int n = 0;
    for (auto v : a) n += v ? 1 : 0;
    return n;
}

int ModeAssignment::monitoring_count() const { return static_cast<int>(a.size()) - downlink_count(); }

void classify_strong_weak(const std::vector<double>& betas, double threshold, int cap,
                          std::vector<int>& strong, std::vector<int>& weak) {
    if (!(threshold > 0.0 && threshold < 1.0))
        throw std::invalid_argument("classify_strong_weak: threshold must lie in (0,1)");
    if (cap < 0) throw std::invalid_argument("classify_strong_weak: negative cap");

    const int L = static_cast<int>(betas.size());
    strong.clear();
    weak.clear();

    double total = 0.0;
    for (double b : betas) {
        if (!(b >= 0.0)) throw std::invalid_argument("classify_strong_weak: negative beta");
        total += b;
    }

    std::vector<int> above;
    if (total > 0.0) {
        for (int l = 0; l < L; ++l)
            if (betas[static_cast<size_t>(l)] / total >= threshold) above.push_back(l);
    }

    if (static_cast<int>(above.size()) > cap) {
        // Keep the cap largest; stable sort preserves index order on ties.
        std::stable_sort(above.begin(), above.end(), [&](int x, int y) {
            return betas[static_cast<size_t>(x)] > betas[static_cast<size_t>(y)];
        });
        above.resize(static_cast<size_t>(cap));
        std::sort(above.begin(), above.end());
    }

    strong = std::move(above);
    std::vector<char> in_strong(static_cast<size_t>(L), 0);
    for (int l : strong) in_strong[static_cast<size_t>(l)] = 1;
    for (int l = 0; l < L; ++l)
        if (!in_strong[static_cast<size_t>(l)]) weak.push_back(l);
}

namespace {

RolePartitions partition_role(const Eigen::MatrixXd& beta, double threshold, int cap) {
    const int M = static_cast<int>(beta.rows());
    const int L = static_cast<int>(beta.cols());
    RolePartitions p;
    p.strong.resize(static_cast<size_t>(M));
    p.weak.resize(static_cast<size_t>(M));
    p.is_strong.assign(static_cast<size_t>(M), std::vector<char>(static_cast<size_t>(L), 0));

    std::vector<double> row(static_cast<size_t>(L));
    for (int m = 0; m < M; ++m) {
        for (int l = 0; l < L; ++l) row[static_cast<size_t>(l)] = beta(m, l);
        classify_strong_weak(row, threshold, cap, p.strong[static_cast<size_t>(m)], p.weak[static_cast<size_t>(m)]);
        for (int l : p.strong[static_cast<size_t>(m)]) p.is_strong[static_cast<size_t>(m)][static_cast<size_t>(l)] = 1;
    }
    return p;
}

}  // namespace

ApPartitions build_ap_partitions(const LargeScaleState& ls, const SystemConfig& config) {
    const int cap = config.N - 1;
    ApPartitions parts;
    parts.d = partition_role(ls.beta_dl, config.grouping_threshold, cap);
    parts.j = partition_role(ls.beta_jam, config.grouping_threshold, cap);
    parts.o = partition_role(ls.beta_obs, config.grouping_threshold, cap);
    return parts;
}

GroupingState build_groups(const ApPartitions& parts, const ModeAssignment& a, int K, int U) {
    const int M = static_cast<int>(a.a.size());
    GroupingState g;
    g.assignment = a;
    g.parts = parts;
    g.z_d.assign(static_cast<size_t>(K), {});
    g.zbar_d.assign(static_cast<size_t>(K), {});
    g.z_j.assign(static_cast<size_t>(U), {});
    g.zbar_j.assign(static_cast<size_t>(U), {});
    g.z_o.assign(static_cast<size_t>(U), {});
    g.zbar_o.assign(static_cast<size_t>(U), {});

    for (int m = 0; m < M; ++m) {
        if (a.a[static_cast<size_t>(m)]) {
            for (int k = 0; k < K; ++k)
                (parts.d.is_strong[static_cast<size_t>(m)][static_cast<size_t>(k)] ? g.z_d : g.zbar_d)[static_cast<size_t>(k)]
                    .push_back(m);
            for (int u = 0; u < U; ++u)
                (parts.j.is_strong[static_cast<size_t>(m)][static_cast<size_t>(u)] ? g.z_j : g.zbar_j)[static_cast<size_t>(u)]
                    .push_back(m);
        } else {
            for (int u = 0; u < U; ++u)
                (parts.o.is_strong[static_cast<size_t>(m)][static_cast<size_t>(u)] ? g.z_o : g.zbar_o)[static_cast<size_t>(u)]
                    .push_back(m);
        }
    }
    return g;
}

GroupingState build_groups(const LargeScaleState& ls, const ModeAssignment& a, const SystemConfig& config) {
    if (static_cast<int>(a.a.size()) != config.M)
        throw std::invalid_argument("build_groups: mode vector length differs from M");
    for (auto v : a.a)
        if (v > 1) throw std::invalid_argument("build_groups: mode entries must be 0 or 1");
    return build_groups(build_ap_partitions(ls, config), a, config.K, config.U);
}

}  // namespace jcam
