// SPDX-License-Identifier: Apache-2.0
//
// Experiment harness: flat key=value config parsing, single-drop runs,
// closed-form verification runs, and multi-drop parameter sweeps with a
// pinned CSV schema.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "assignment.hpp"
#include "mc.hpp"

namespace jcam {

// Config / experiment-spec problems; messages carry "origin:line:" where a
// line is known.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem problems (unreadable config, unwritable output).
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Strategy { greedy, random, brute, colocated };

const char* strategy_name(Strategy s);
Strategy strategy_from_name(const std::string& name);

// Parsed experiment description.  config holds the base parameters with
// tau already defaulted to K+U when the file does not pin it; sweeps
// re-resolve tau and the untrusted power list per point.
struct ExperimentSpec {
    SystemConfig config;
    bool tau_explicit = false;
    bool p_untrusted_is_list = false;
    double p_untrusted_scalar = 0.2;
    std::vector<double> p_untrusted_list;

    std::vector<Strategy> strategies;  // execution and CSV row order, no duplicates

    std::string sweep_var;  // "", or one of M, N, K, U, grouping_threshold
    std::vector<double> sweep_values;
    int drops_per_point = 50;
    int fixed_total_antennas = 0;  // > 0: N sweep keeps M*N at this total

    std::string origin;  // config path (or caller-supplied name) for diagnostics
};

ExperimentSpec parse_experiment_text(const std::string& text, const std::string& origin);
ExperimentSpec parse_experiment_file(const std::string& path);

// One CSV row: a strategy's outcome on one drop.  Drop i of master seed s
// is derive_seed(s, "drop", i), so drops pair across sweep values and
// strategies by construction.
struct StrategyOutcome {
    Strategy strategy = Strategy::greedy;
    std::uint64_t drop_seed = 0;
    double sweep_val = 0.0;  // 0 when no sweep
    PerformanceReport report;
    std::string modes;  // a_m per AP, '1' downlink / '0' monitoring
    int iterations = 0;
    long long candidate_evaluations = 0;
    bool feasible = false;
    double runtime_ms = 0.0;  // stays 0 unless timing was requested
};

struct ExperimentResult {
    std::vector<StrategyOutcome> rows;  // CSV emission order
    std::string csv;                    // header + rows, pinned schema
    std::string summary;                // human-readable digest
};

// Header: strategy,seed,sweep_var,sweep_val,min_se,min_msp,iterations,
// candidate_evaluations,runtime_ms.  sweep_var prints "none" for single runs.
std::string results_to_csv(const std::vector<StrategyOutcome>& rows, const std::string& sweep_var);

// One drop (index 0), every requested strategy.  When config.qos_se < 0
// the QoS floor is the random baseline's min SE on the drop, computed
// before any optimizing strategy runs.
ExperimentResult run_single(const ExperimentSpec& spec, bool timing = false);

// Every (sweep value, drop) pair, drops parallelized over jobs workers;
// rows are emitted in (value, drop, strategy) order regardless of jobs.
ExperimentResult run_sweep(const ExperimentSpec& spec, int jobs = 1, bool timing = false);

// Closed-form verification on drop 0 with the floor(M/2) random mode split
// (the same assignment the random strategy uses on that drop).
mc::VerificationReport run_verify(const ExperimentSpec& spec, long long trials, double tol,
                                  int jobs = 1);

std::string verify_summary(const mc::VerificationReport& rep);

// scenario_to_text dump of drop 0 under the base config.
std::string scenario_dump(const ExperimentSpec& spec);

}  // namespace jcam
