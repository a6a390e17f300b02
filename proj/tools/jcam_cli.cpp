// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end over the C API.  Exit codes: 0 success,
// 1 verification gate failure, 2 configuration/usage/IO errors.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>

#include <CLI11.hpp>

#include "jcam/jcam.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitUsage = 2;

// Owned C string from the API.
struct ApiString {
    char* ptr = nullptr;
    ~ApiString() { jcam_string_free(ptr); }
    const char* get() const { return ptr ? ptr : ""; }
};

int fail(jcam_status st) {
    std::fprintf(stderr, "error (%s): %s\n", jcam_status_name(st), jcam_last_error());
    return kExitUsage;
}

// CSV handling shared by the subcommands: write to --out when given
// (summary goes to stdout), else print the CSV itself to stdout.
int emit(const std::string& out_path, const char* csv, const char* summary) {
    if (out_path.empty()) {
        std::fputs(csv, stdout);
        return kExitOk;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
        std::fprintf(stderr, "error (io error): cannot open output file: %s\n", out_path.c_str());
        return kExitUsage;
    }
    out << csv;
    if (!out.flush()) {
        std::fprintf(stderr, "error (io error): cannot write output file: %s\n", out_path.c_str());
        return kExitUsage;
    }
    std::fputs(summary, stdout);
    std::printf("wrote %s\n", out_path.c_str());
    return kExitOk;
}

struct CommonOpts {
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int jobs = 1;
    bool timing = false;
};

// Parsed experiment with the optional --seed override applied.
jcam_status load_experiment(const CommonOpts& opts, jcam_experiment** e) {
    jcam_status st = jcam_experiment_parse_file(opts.config.c_str(), e);
    if (st != JCAM_OK) return st;
    if (opts.seed_set) st = jcam_experiment_set_seed(*e, opts.seed);
    return st;
}

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_jobs) {
    cmd->add_option("--config", opts.config, "experiment config file (key=value lines)")
        ->required();
    cmd->add_option("--out", opts.out, "CSV output path (default: CSV to stdout)");
    cmd->add_option("--seed", opts.seed, "override the config's master seed");
    if (with_jobs) cmd->add_option("--jobs", opts.jobs, "worker threads")->default_val(1);
}

void resolve_seed_flag(const CLI::App* cmd, CommonOpts& opts) {
    opts.seed_set = cmd->count("--seed") > 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cell-free massive MIMO joint communication and monitoring toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(jcam_version()));

    CommonOpts single_opts;
    CLI::App* single = app.add_subcommand("single", "one drop, all requested strategies");
    add_common(single, single_opts, false);
    single->add_flag("--timing", single_opts.timing,
                     "measure runtime_ms (breaks byte-identical reruns)");
    std::string dump_path;
    single->add_option("--dump-scenario", dump_path, "also write a scenario text dump here");

    CommonOpts verify_opts;
    long long trials = 10000;
    double tol = 0.05;
    CLI::App* verify = app.add_subcommand("verify", "closed-form vs Monte Carlo verification");
    add_common(verify, verify_opts, true);
    verify->add_option("--trials", trials, "Monte Carlo channel realizations")->default_val(10000);
    verify->add_option("--tol", tol, "relative tolerance per term")->default_val(0.05);

    CommonOpts sweep_opts;
    CLI::App* sweep = app.add_subcommand("sweep", "parameter sweep over seeded drops");
    add_common(sweep, sweep_opts, true);
    sweep->add_flag("--timing", sweep_opts.timing,
                    "measure runtime_ms (breaks byte-identical reruns)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    resolve_seed_flag(single, single_opts);
    resolve_seed_flag(verify, verify_opts);
    resolve_seed_flag(sweep, sweep_opts);

    if (single->parsed()) {
        jcam_experiment* e = nullptr;
        jcam_status st = load_experiment(single_opts, &e);
        if (st != JCAM_OK) return fail(st);
        ApiString csv;
        ApiString summary;
        st = jcam_run_single(e, single_opts.timing ? 1 : 0, &csv.ptr, &summary.ptr);
        if (st == JCAM_OK && !dump_path.empty()) {
            ApiString text;
            st = jcam_scenario_dump(e, &text.ptr);
            if (st == JCAM_OK) {
                std::ofstream out(dump_path, std::ios::binary);
                if (!(out && (out << text.get()).flush())) {
                    std::fprintf(stderr, "error (io error): cannot write %s\n", dump_path.c_str());
                    jcam_experiment_free(e);
                    return kExitUsage;
                }
            }
        }
        jcam_experiment_free(e);
        if (st != JCAM_OK) return fail(st);
        return emit(single_opts.out, csv.get(), summary.get());
    }

    if (verify->parsed()) {
        jcam_experiment* e = nullptr;
        jcam_status st = load_experiment(verify_opts, &e);
        if (st != JCAM_OK) return fail(st);
        ApiString csv;
        ApiString summary;
        int mandatory_pass = 0;
        st = jcam_run_verify(e, trials, tol, verify_opts.jobs, &csv.ptr, &summary.ptr,
                             &mandatory_pass);
        jcam_experiment_free(e);
        if (st != JCAM_OK) return fail(st);
        const int rc = emit(verify_opts.out, csv.get(), summary.get());
        if (rc != kExitOk) return rc;
        if (!mandatory_pass) {
            std::fprintf(stderr, "verification failed: a mandatory term exceeded tol\n");
            return kExitVerifyFailed;
        }
        return kExitOk;
    }

    // sweep
    jcam_experiment* e = nullptr;
    jcam_status st = load_experiment(sweep_opts, &e);
    if (st != JCAM_OK) return fail(st);
    ApiString csv;
    ApiString summary;
    st = jcam_run_sweep(e, sweep_opts.jobs, sweep_opts.timing ? 1 : 0, &csv.ptr, &summary.ptr);
    jcam_experiment_free(e);
    if (st != JCAM_OK) return fail(st);
    return emit(sweep_opts.out, csv.get(), summary.get());
}
