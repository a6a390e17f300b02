// SPDX-License-Identifier: Apache-2.0

#include "jcam/jcam.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <stdexcept>
#include <string>

#include "experiment.hpp"

struct jcam_experiment {
    jcam::ExperimentSpec spec;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void set_out(char** slot, const std::string& value) {
    if (slot) *slot = dup_string(value);
}

// Runs fn, mapping exceptions to statuses and capturing the message.
template <typename Fn>
jcam_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return JCAM_OK;
    } catch (const jcam::ConfigError& e) {
        g_last_error = e.what();
        return JCAM_ERR_PARSE;
    } catch (const jcam::IoError& e) {
        g_last_error = e.what();
        return JCAM_ERR_IO;
    } catch (const std::invalid_argument& e) {
        g_last_error = e.what();
        return JCAM_ERR_INVALID_ARGUMENT;
    } catch (const std::domain_error& e) {
        g_last_error = e.what();
        return JCAM_ERR_INVALID_ARGUMENT;
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return JCAM_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return JCAM_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return JCAM_ERR_INTERNAL;
    }
}

jcam_status require(bool ok, const char* msg) {
    if (ok) return JCAM_OK;
    g_last_error = msg;
    return JCAM_ERR_INVALID_ARGUMENT;
}

}  // namespace

extern "C" {

const char* jcam_version(void) { return "1.0.0"; }

const char* jcam_status_name(jcam_status s) {
    switch (s) {
        case JCAM_OK: return "ok";
        case JCAM_ERR_INVALID_ARGUMENT: return "invalid argument";
        case JCAM_ERR_PARSE: return "parse error";
        case JCAM_ERR_IO: return "io error";
        case JCAM_ERR_UNSUPPORTED: return "unsupported";
        case JCAM_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* jcam_last_error(void) { return g_last_error.c_str(); }

void jcam_string_free(char* s) { std::free(s); }

jcam_status jcam_experiment_parse_file(const char* path, jcam_experiment** out) {
    if (jcam_status st = require(path && out, "path and out must be non-null")) return st;
    *out = nullptr;
    return guarded([&] {
        auto* e = new jcam_experiment{jcam::parse_experiment_file(path)};
        *out = e;
    });
}

jcam_status jcam_experiment_parse_text(const char* text, const char* name, jcam_experiment** out) {
    if (jcam_status st = require(text && out, "text and out must be non-null")) return st;
    *out = nullptr;
    return guarded([&] {
        auto* e = new jcam_experiment{
            jcam::parse_experiment_text(text, name ? name : "<buffer>")};
        *out = e;
    });
}

void jcam_experiment_free(jcam_experiment* e) { delete e; }

jcam_status jcam_experiment_set_seed(jcam_experiment* e, uint64_t seed) {
    if (jcam_status st = require(e != nullptr, "experiment must be non-null")) return st;
    e->spec.config.seed = seed;
    g_last_error.clear();
    return JCAM_OK;
}

jcam_status jcam_run_single(const jcam_experiment* e, int timing, char** csv_out,
                            char** summary_out) {
    if (jcam_status st = require(e != nullptr, "experiment must be non-null")) return st;
    return guarded([&] {
        const jcam::ExperimentResult res = jcam::run_single(e->spec, timing != 0);
        set_out(csv_out, res.csv);
        set_out(summary_out, res.summary);
    });
}

jcam_status jcam_run_sweep(const jcam_experiment* e, int jobs, int timing, char** csv_out,
                           char** summary_out) {
    if (jcam_status st = require(e != nullptr, "experiment must be non-null")) return st;
    return guarded([&] {
        const jcam::ExperimentResult res = jcam::run_sweep(e->spec, jobs, timing != 0);
        set_out(csv_out, res.csv);
        set_out(summary_out, res.summary);
    });
}

jcam_status jcam_run_verify(const jcam_experiment* e, long long trials, double tol, int jobs,
                            char** csv_out, char** summary_out, int* mandatory_pass_out) {
    if (jcam_status st = require(e != nullptr, "experiment must be non-null")) return st;
    return guarded([&] {
        const jcam::mc::VerificationReport rep = jcam::run_verify(e->spec, trials, tol, jobs);
        set_out(csv_out, jcam::mc::verification_to_csv(rep));
        set_out(summary_out, jcam::verify_summary(rep));
        if (mandatory_pass_out) *mandatory_pass_out = rep.mandatory_pass ? 1 : 0;
    });
}

jcam_status jcam_scenario_dump(const jcam_experiment* e, char** text_out) {
    if (jcam_status st = require(e && text_out, "experiment and text_out must be non-null"))
        return st;
    return guarded([&] { set_out(text_out, jcam::scenario_dump(e->spec)); });
}

}  // extern "C"
