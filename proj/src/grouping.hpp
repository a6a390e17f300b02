// SPDX-License-Identifier: Apache-2.0
//
// Strong/weak classification per AP per role (D = downlink users,
// J = jammed untrusted receivers, O = observed untrusted transmitters)
// and the derived per-target Z sets.

#pragma once

#include <cstdint>
#include <vector>

#include "scenario.hpp"

namespace jcam {

struct ModeAssignment {
    // a[m] = 1: downlink/jamming mode; a[m] = 0: monitoring mode.
    std::vector<std::uint8_t> a;

    int downlink_count() const;
    int monitoring_count() const;
};

// Partition of one target-index set for every AP and one role.  The
// partitions depend only on the large-scale state, never on the mode
// vector, so they are computed once per drop and shared.
struct RolePartitions {
    std::vector<std::vector<int>> strong;       // per AP, sorted target indices
    std::vector<std::vector<int>> weak;         // complement, sorted
    std::vector<std::vector<char>> is_strong;   // per AP, flag per target
};

// Mode-independent grouping input: partitions for all APs and all roles.
struct ApPartitions {
    RolePartitions d;  // over K downlink users
    RolePartitions j;  // over U untrusted receivers
    RolePartitions o;  // over U untrusted transmitters
};

struct GroupingState {
    ModeAssignment assignment;
    ApPartitions parts;

    // Z_D[k] = {m: a_m=1, k in S_D[m]}, Zbar_D[k] = {m: a_m=1, k in W_D[m]};
    // J analogous over downlink APs, O over monitoring APs.
    std::vector<std::vector<int>> z_d, zbar_d;  // size K
    std::vector<std::vector<int>> z_j, zbar_j;  // size U
    std::vector<std::vector<int>> z_o, zbar_o;  // size U
};

// Share rule: l in S iff betas[l] / sum(betas) >= threshold, truncated to
// the cap largest (ties to the lower index).  All-zero input: all weak.
void classify_strong_weak(const std::vector<double>& betas, double threshold, int cap,
                          std::vector<int>& strong, std::vector<int>& weak);

ApPartitions build_ap_partitions(const LargeScaleState& ls, const SystemConfig& config);

GroupingState build_groups(const LargeScaleState& ls, const ModeAssignment& a, const SystemConfig& config);

// Z-set assembly from precomputed partitions (greedy re-runs this per move).
GroupingState build_groups(const ApPartitions& parts, const ModeAssignment& a, int K, int U);

}  // namespace jcam
