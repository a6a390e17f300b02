// SPDX-License-Identifier: Apache-2.0

#include "experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "rng.hpp"

namespace jcam {

namespace {

std::string trim(const std::string& s) {
    size_t b = 0;
    size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    size_t start = 0;
    while (start <= s.size()) {
        const size_t comma = s.find(',', start);
        const size_t end = comma == std::string::npos ? s.size() : comma;
        out.push_back(trim(s.substr(start, end - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string fmt_g(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

struct RawValue {
    std::string text;
    int line = 0;
};

// key=value lines with '#' comments.  Keys are taken one by one; leftovers
// are unknown-key errors pointing at their line.
class KeyReader {
public:
    KeyReader(const std::string& text, std::string origin) : origin_(std::move(origin)) {
        std::istringstream in(text);
        std::string line;
        int no = 0;
        while (std::getline(in, line)) {
            ++no;
            const size_t hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const std::string t = trim(line);
            if (t.empty()) continue;
            const size_t eq = t.find('=');
            if (eq == std::string::npos) fail(no, "expected key=value");
            const std::string key = trim(t.substr(0, eq));
            if (key.empty()) fail(no, "empty key");
            if (kv_.count(key)) fail(no, "duplicate key '" + key + "'");
            kv_[key] = RawValue{trim(t.substr(eq + 1)), no};
        }
    }

    [[noreturn]] void fail(int line, const std::string& msg) const {
        throw ConfigError(origin_ + ":" + std::to_string(line) + ": " + msg);
    }
    [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(origin_ + ": " + msg); }

    std::optional<RawValue> take(const std::string& key) {
        auto it = kv_.find(key);
        if (it == kv_.end()) return std::nullopt;
        RawValue v = std::move(it->second);
        kv_.erase(it);
        return v;
    }

    RawValue require(const std::string& key) {
        auto v = take(key);
        if (!v) fail("missing required key '" + key + "'");
        return *v;
    }

    void finish() const {
        if (kv_.empty()) return;
        const std::string* key = nullptr;
        const RawValue* val = nullptr;
        for (const auto& [k, v] : kv_)
            if (!val || v.line < val->line) {
                key = &k;
                val = &v;
            }
        fail(val->line, "unknown key '" + *key + "'");
    }

private:
    std::string origin_;
    std::map<std::string, RawValue> kv_;
};

long long parse_ll(const KeyReader& r, const RawValue& v, const std::string& key) {
    long long out = 0;
    const char* b = v.text.data();
    const char* e = b + v.text.size();
    const auto [p, ec] = std::from_chars(b, e, out);
    if (v.text.empty() || ec != std::errc() || p != e)
        r.fail(v.line, "invalid integer for '" + key + "'");
    return out;
}

std::uint64_t parse_u64(const KeyReader& r, const RawValue& v, const std::string& key) {
    std::uint64_t out = 0;
    const char* b = v.text.data();
    const char* e = b + v.text.size();
    const auto [p, ec] = std::from_chars(b, e, out);
    if (v.text.empty() || ec != std::errc() || p != e)
        r.fail(v.line, "invalid unsigned integer for '" + key + "'");
    return out;
}

double parse_num(const KeyReader& r, const std::string& text, int line, const std::string& key) {
    if (text.empty()) r.fail(line, "invalid number for '" + key + "'");
    char* end = nullptr;
    const double out = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size()) r.fail(line, "invalid number for '" + key + "'");
    return out;
}

double parse_double(const KeyReader& r, const RawValue& v, const std::string& key) {
    return parse_num(r, v.text, v.line, key);
}

std::vector<double> parse_double_list(const KeyReader& r, const RawValue& v, const std::string& key) {
    std::vector<double> out;
    for (const std::string& item : split_list(v.text)) out.push_back(parse_num(r, item, v.line, key));
    return out;
}

int checked_int(const KeyReader& r, const RawValue& v, const std::string& key, long long lo,
                long long hi) {
    const long long x = parse_ll(r, v, key);
    if (x < lo || x > hi)
        r.fail(v.line, "'" + key + "' out of range [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "]");
    return static_cast<int>(x);
}

bool integral_positive(double v) { return v > 0.0 && v == std::floor(v) && v <= 1e9; }

std::string modes_string(const ModeAssignment& a) {
    std::string s;
    s.reserve(a.a.size());
    for (std::uint8_t m : a.a) s += m ? '1' : '0';
    return s;
}

void fill_outcome(StrategyOutcome& out, const AssignmentResult& res) {
    out.report = res.report;
    out.modes = modes_string(res.assignment);
    out.iterations = res.iterations;
    out.candidate_evaluations = res.candidate_evaluations;
    out.feasible = res.feasible;
}

// Base config adjusted to one sweep point (or just validated when swept is
// false).  Validation failures become ConfigError with the point named.
SystemConfig point_config(const ExperimentSpec& spec, bool swept, double v) {
    SystemConfig cfg = spec.config;
    if (swept) {
        const std::string& sv = spec.sweep_var;
        if (sv == "M")
            cfg.M = static_cast<int>(std::llround(v));
        else if (sv == "N") {
            cfg.N = static_cast<int>(std::llround(v));
            if (spec.fixed_total_antennas > 0) cfg.M = spec.fixed_total_antennas / cfg.N;
        } else if (sv == "K")
            cfg.K = static_cast<int>(std::llround(v));
        else if (sv == "U")
            cfg.U = static_cast<int>(std::llround(v));
        else if (sv == "grouping_threshold")
            cfg.grouping_threshold = v;

        if (!spec.tau_explicit) cfg.tau = cfg.K + cfg.U;
        if (spec.p_untrusted_is_list) {
            if (static_cast<int>(spec.p_untrusted_list.size()) != cfg.U)
                throw ConfigError(spec.origin + ": p_untrusted_watts list has " +
                                  std::to_string(spec.p_untrusted_list.size()) +
                                  " entries but sweep point has U=" + std::to_string(cfg.U));
            cfg.p_untrusted_watts = spec.p_untrusted_list;
        } else {
            cfg.p_untrusted_watts.assign(static_cast<size_t>(cfg.U), spec.p_untrusted_scalar);
        }
    }
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        const std::string where =
            swept ? ": sweep point " + spec.sweep_var + "=" + fmt_g(v) + ": " : ": ";
        throw ConfigError(spec.origin + where + e.what());
    }
    return cfg;
}

// One drop: scenario build, QoS resolution via the random baseline, then
// every requested strategy in listed order.
std::vector<StrategyOutcome> run_drop(const ExperimentSpec& spec, const SystemConfig& cfg_point,
                                      double sweep_val, long long drop_index, bool timing) {
    const std::uint64_t drop_seed =
        derive_seed(spec.config.seed, "drop", static_cast<std::uint64_t>(drop_index));
    const Layout layout = place_nodes(cfg_point, drop_seed);
    const LargeScaleState ls = build_large_scale(layout, cfg_point, drop_seed);

    using clock = std::chrono::steady_clock;
    const auto ms_since = [](clock::time_point t0) {
        return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    };

    const auto t_rand = clock::now();
    AssignmentResult rand_res = random_mode_assignment(ls, cfg_point, drop_seed);
    const double rand_ms = timing ? ms_since(t_rand) : 0.0;

    SystemConfig cfg = cfg_point;
    if (cfg.qos_se < 0.0) cfg.qos_se = rand_res.report.min_se;
    rand_res.feasible = rand_res.report.min_se >= cfg.qos_se;

    std::vector<StrategyOutcome> rows;
    rows.reserve(spec.strategies.size());
    for (Strategy s : spec.strategies) {
        StrategyOutcome out;
        out.strategy = s;
        out.drop_seed = drop_seed;
        out.sweep_val = sweep_val;
        const auto t0 = clock::now();
        switch (s) {
            case Strategy::random:
                fill_outcome(out, rand_res);
                out.runtime_ms = rand_ms;
                break;
            case Strategy::greedy: {
                const AssignmentResult res = greedy_mode_assignment(ls, cfg);
                fill_outcome(out, res);
                out.runtime_ms = timing ? ms_since(t0) : 0.0;
                break;
            }
            case Strategy::brute: {
                const AssignmentResult res = brute_force_assignment(ls, cfg);
                fill_outcome(out, res);
                out.runtime_ms = timing ? ms_since(t0) : 0.0;
                break;
            }
            case Strategy::colocated: {
                const ColocatedScenario col = colocated_baseline(cfg, drop_seed);
                out.report = evaluate(col.ls, col.groups, col.assignment, col.config);
                out.modes = modes_string(col.assignment);
                out.feasible = out.report.min_se >= cfg.qos_se;
                out.runtime_ms = timing ? ms_since(t0) : 0.0;
                break;
            }
        }
        rows.push_back(std::move(out));
    }
    return rows;
}

std::string single_summary(const ExperimentSpec& spec, const std::vector<StrategyOutcome>& rows) {
    std::string out;
    char buf[256];
    if (!rows.empty()) {
        std::snprintf(buf, sizeof buf, "drop seed %llu (master %llu)\n",
                      static_cast<unsigned long long>(rows.front().drop_seed),
                      static_cast<unsigned long long>(spec.config.seed));
        out += buf;
        if (spec.config.qos_se < 0.0)
            out += "qos floor: random baseline's min SE on this drop\n";
        else
            out += "qos floor: " + fmt_g(spec.config.qos_se) + " bits/s/Hz\n";
    }
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf,
                      "%-9s min_se=%-12.6g min_msp=%-12.6g iterations=%-3d evaluations=%-8lld "
                      "feasible=%-3s modes=%s\n",
                      strategy_name(r.strategy), r.report.min_se, r.report.min_msp, r.iterations,
                      r.candidate_evaluations, r.feasible ? "yes" : "no", r.modes.c_str());
        out += buf;
    }
    return out;
}

std::string sweep_summary(const ExperimentSpec& spec, const std::vector<StrategyOutcome>& rows) {
    const size_t S = spec.strategies.size();
    const size_t D = static_cast<size_t>(spec.drops_per_point);
    std::string out;
    char buf[256];
    for (size_t p = 0; p < spec.sweep_values.size(); ++p) {
        std::snprintf(buf, sizeof buf, "%s=%s over %zu drops:\n", spec.sweep_var.c_str(),
                      fmt_g(spec.sweep_values[p]).c_str(), D);
        out += buf;
        for (size_t s = 0; s < S; ++s) {
            double sum = 0.0;
            double sum_se = 0.0;
            double ss = 0.0;
            size_t feas = 0;
            for (size_t i = 0; i < D; ++i) {
                const StrategyOutcome& r = rows[(p * D + i) * S + s];
                sum += r.report.min_msp;
                sum_se += r.report.min_se;
                feas += r.feasible ? 1 : 0;
            }
            const double mean = sum / static_cast<double>(D);
            for (size_t i = 0; i < D; ++i) {
                const double d = rows[(p * D + i) * S + s].report.min_msp - mean;
                ss += d * d;
            }
            const double se =
                D > 1 ? std::sqrt(ss / (static_cast<double>(D) * static_cast<double>(D - 1))) : 0.0;
            std::snprintf(buf, sizeof buf,
                          "  %-9s mean_min_msp=%-10.6g se=%-9.3g mean_min_se=%-10.6g "
                          "feasible=%zu/%zu\n",
                          strategy_name(spec.strategies[s]), mean, se,
                          sum_se / static_cast<double>(D), feas, D);
            out += buf;
        }
    }
    return out;
}

}  // namespace

const char* strategy_name(Strategy s) {
    switch (s) {
        case Strategy::greedy: return "greedy";
        case Strategy::random: return "random";
        case Strategy::brute: return "brute";
        case Strategy::colocated: return "colocated";
    }
    return "unknown";
}

Strategy strategy_from_name(const std::string& name) {
    if (name == "greedy") return Strategy::greedy;
    if (name == "random") return Strategy::random;
    if (name == "brute") return Strategy::brute;
    if (name == "colocated") return Strategy::colocated;
    throw ConfigError("unknown strategy '" + name + "'");
}

ExperimentSpec parse_experiment_text(const std::string& text, const std::string& origin) {
    KeyReader r(text, origin);
    ExperimentSpec spec;
    spec.origin = origin;
    SystemConfig& cfg = spec.config;

    {
        const RawValue v = r.require("M");
        cfg.M = checked_int(r, v, "M", 1, 100000);
    }
    {
        const RawValue v = r.require("N");
        cfg.N = checked_int(r, v, "N", 1, 100000);
    }
    {
        const RawValue v = r.require("K");
        cfg.K = checked_int(r, v, "K", 0, 100000);
    }
    {
        const RawValue v = r.require("U");
        cfg.U = checked_int(r, v, "U", 0, 100000);
    }
    {
        const RawValue v = r.require("seed");
        cfg.seed = parse_u64(r, v, "seed");
    }

    if (auto v = r.take("area_side_m")) cfg.area_side_m = parse_double(r, *v, "area_side_m");
    if (auto v = r.take("p_ap_watts")) cfg.p_ap_watts = parse_double(r, *v, "p_ap_watts");
    if (auto v = r.take("noise_dbm")) cfg.noise_dbm = parse_double(r, *v, "noise_dbm");
    if (auto v = r.take("bandwidth_hz")) cfg.bandwidth_hz = parse_double(r, *v, "bandwidth_hz");
    if (auto v = r.take("grouping_threshold"))
        cfg.grouping_threshold = parse_double(r, *v, "grouping_threshold");
    if (auto v = r.take("d_min_m")) cfg.d_min_m = parse_double(r, *v, "d_min_m");
    if (auto v = r.take("e_min")) cfg.e_min = parse_double(r, *v, "e_min");
    if (auto v = r.take("qos_se")) cfg.qos_se = parse_double(r, *v, "qos_se");
    if (auto v = r.take("T")) cfg.T = checked_int(r, *v, "T", 1, 1000000);
    if (auto v = r.take("tau")) {
        cfg.tau = checked_int(r, *v, "tau", 1, 1000000);
        spec.tau_explicit = true;
    }

    if (auto v = r.take("p_untrusted_watts")) {
        const std::vector<double> vals = parse_double_list(r, *v, "p_untrusted_watts");
        if (vals.empty()) r.fail(v->line, "empty value list for 'p_untrusted_watts'");
        if (vals.size() == 1) {
            spec.p_untrusted_scalar = vals.front();
        } else {
            spec.p_untrusted_is_list = true;
            spec.p_untrusted_list = vals;
        }
    }

    if (auto v = r.take("strategies")) {
        for (const std::string& name : split_list(v->text)) {
            Strategy s = Strategy::greedy;
            try {
                s = strategy_from_name(name);
            } catch (const ConfigError& e) {
                r.fail(v->line, e.what());
            }
            if (std::find(spec.strategies.begin(), spec.strategies.end(), s) !=
                spec.strategies.end())
                r.fail(v->line, "duplicate strategy '" + name + "'");
            spec.strategies.push_back(s);
        }
        if (spec.strategies.empty()) r.fail(v->line, "empty strategy list");
    } else {
        spec.strategies = {Strategy::greedy, Strategy::random};
    }

    std::optional<RawValue> sweep_var_raw = r.take("sweep_var");
    if (sweep_var_raw) {
        const std::string& sv = sweep_var_raw->text;
        if (sv != "M" && sv != "N" && sv != "K" && sv != "U" && sv != "grouping_threshold")
            r.fail(sweep_var_raw->line,
                   "sweep_var must be one of M, N, K, U, grouping_threshold");
        spec.sweep_var = sv;
    }
    if (auto v = r.take("sweep_values")) {
        if (spec.sweep_var.empty()) r.fail(v->line, "sweep_values given without sweep_var");
        spec.sweep_values = parse_double_list(r, *v, "sweep_values");
        if (spec.sweep_values.empty()) r.fail(v->line, "empty value list for 'sweep_values'");
        if (spec.sweep_var != "grouping_threshold") {
            for (double val : spec.sweep_values)
                if (!integral_positive(val))
                    r.fail(v->line, "sweep value for '" + spec.sweep_var +
                                        "' must be a positive integer");
        }
    } else if (!spec.sweep_var.empty()) {
        r.fail(sweep_var_raw->line, "sweep_var given without sweep_values");
    }
    if (auto v = r.take("drops_per_point")) spec.drops_per_point = checked_int(r, *v, "drops_per_point", 1, 1000000);
    if (auto v = r.take("fixed_total_antennas")) {
        spec.fixed_total_antennas = checked_int(r, *v, "fixed_total_antennas", 1, 10000000);
        if (spec.sweep_var != "N")
            r.fail(v->line, "fixed_total_antennas requires sweep_var = N");
        for (double val : spec.sweep_values) {
            const int n = static_cast<int>(std::llround(val));
            if (spec.fixed_total_antennas % n != 0)
                r.fail(v->line, "fixed_total_antennas=" + std::to_string(spec.fixed_total_antennas) +
                                    " is not divisible by N=" + std::to_string(n));
        }
    }
    r.finish();

    if (spec.p_untrusted_is_list && spec.sweep_var == "U")
        r.fail("sweeping U requires a scalar p_untrusted_watts");
    if (spec.p_untrusted_is_list) {
        if (static_cast<int>(spec.p_untrusted_list.size()) != cfg.U)
            r.fail("p_untrusted_watts: need 1 or U=" + std::to_string(cfg.U) + " entries, got " +
                   std::to_string(spec.p_untrusted_list.size()));
        cfg.p_untrusted_watts = spec.p_untrusted_list;
    } else {
        cfg.p_untrusted_watts.assign(static_cast<size_t>(cfg.U), spec.p_untrusted_scalar);
    }
    if (!spec.tau_explicit) cfg.tau = cfg.K + cfg.U;

    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        r.fail(e.what());
    }
    return spec;
}

ExperimentSpec parse_experiment_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_experiment_text(ss.str(), path);
}

std::string results_to_csv(const std::vector<StrategyOutcome>& rows, const std::string& sweep_var) {
    std::string out =
        "strategy,seed,sweep_var,sweep_val,min_se,min_msp,iterations,candidate_evaluations,"
        "runtime_ms\n";
    const std::string var = sweep_var.empty() ? "none" : sweep_var;
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%llu,%s,%.12g,%.12g,%.12g,%d,%lld,%.12g\n",
                      strategy_name(r.strategy), static_cast<unsigned long long>(r.drop_seed),
                      var.c_str(), r.sweep_val, r.report.min_se, r.report.min_msp, r.iterations,
                      r.candidate_evaluations, r.runtime_ms);
        out += buf;
    }
    return out;
}

ExperimentResult run_single(const ExperimentSpec& spec, bool timing) {
    const SystemConfig cfg = point_config(spec, false, 0.0);
    ExperimentResult res;
    res.rows = run_drop(spec, cfg, 0.0, 0, timing);
    res.csv = results_to_csv(res.rows, "");
    res.summary = single_summary(spec, res.rows);
    return res;
}

ExperimentResult run_sweep(const ExperimentSpec& spec, int jobs, bool timing) {
    if (spec.sweep_var.empty())
        throw ConfigError(spec.origin + ": sweep requires sweep_var and sweep_values");
    if (jobs < 1) throw ConfigError("jobs must be >= 1");

    const size_t P = spec.sweep_values.size();
    const size_t D = static_cast<size_t>(spec.drops_per_point);
    std::vector<SystemConfig> cfgs;
    cfgs.reserve(P);
    for (double v : spec.sweep_values) cfgs.push_back(point_config(spec, true, v));

    const size_t tasks = P * D;
    std::vector<std::vector<StrategyOutcome>> slots(tasks);
    std::atomic<size_t> next{0};
    std::mutex err_mu;
    std::exception_ptr err;

    auto worker = [&] {
        for (;;) {
            const size_t t = next.fetch_add(1);
            if (t >= tasks) break;
            {
                std::lock_guard<std::mutex> lock(err_mu);
                if (err) break;
            }
            const size_t p = t / D;
            const size_t i = t % D;
            try {
                slots[t] = run_drop(spec, cfgs[p], spec.sweep_values[p],
                                    static_cast<long long>(i), timing);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mu);
                if (!err) err = std::current_exception();
                break;
            }
        }
    };

    const size_t workers = std::min<size_t>(static_cast<size_t>(jobs), tasks ? tasks : 1);
    std::vector<std::thread> pool;
    for (size_t j = 1; j < workers; ++j) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);

    ExperimentResult res;
    res.rows.reserve(tasks * spec.strategies.size());
    for (auto& slot : slots)
        for (auto& row : slot) res.rows.push_back(std::move(row));
    res.csv = results_to_csv(res.rows, spec.sweep_var);
    res.summary = sweep_summary(spec, res.rows);
    return res;
}

mc::VerificationReport run_verify(const ExperimentSpec& spec, long long trials, double tol,
                                  int jobs) {
    if (trials < 1) throw ConfigError(spec.origin + ": trials must be >= 1");
    if (!(tol > 0.0)) throw ConfigError(spec.origin + ": tol must be positive");
    if (jobs < 1) throw ConfigError("jobs must be >= 1");

    const SystemConfig cfg = point_config(spec, false, 0.0);
    const std::uint64_t drop_seed = derive_seed(cfg.seed, "drop", 0);
    const Layout layout = place_nodes(cfg, drop_seed);
    const LargeScaleState ls = build_large_scale(layout, cfg, drop_seed);
    const AssignmentResult rand_res = random_mode_assignment(ls, cfg, drop_seed);
    const GroupingState groups = build_groups(ls, rand_res.assignment, cfg);
    return mc::verify_closed_form(ls, groups, rand_res.assignment, cfg, trials, tol, jobs);
}

std::string verify_summary(const mc::VerificationReport& rep) {
    size_t mandatory = 0;
    size_t mandatory_fail = 0;
    const mc::VerificationRow* worst = nullptr;
    for (const auto& row : rep.rows) {
        if (!row.mandatory) continue;
        ++mandatory;
        if (!row.pass) ++mandatory_fail;
        if (!worst || row.rel_error > worst->rel_error) worst = &row;
    }
    char buf[320];
    std::snprintf(buf, sizeof buf,
                  "verification: trials=%lld tol=%g rows=%zu mandatory=%zu failed=%zu "
                  "mandatory_pass=%s mr_fallbacks=%d\n",
                  rep.trials, rep.tol, rep.rows.size(), mandatory, mandatory_fail,
                  rep.mandatory_pass ? "yes" : "no", rep.mr_fallbacks);
    std::string out = buf;
    if (worst) {
        std::snprintf(buf, sizeof buf, "worst mandatory row: %s rel_error=%.3g (tol %g)\n",
                      worst->term.c_str(), worst->rel_error, rep.tol);
        out += buf;
    }
    if (rep.insufficient_samples)
        out += "warning: fewer than 100 trials; estimates are statistically meaningless\n";
    return out;
}

std::string scenario_dump(const ExperimentSpec& spec) {
    const SystemConfig cfg = point_config(spec, false, 0.0);
    const std::uint64_t drop_seed = derive_seed(cfg.seed, "drop", 0);
    const Layout layout = place_nodes(cfg, drop_seed);
    const LargeScaleState ls = build_large_scale(layout, cfg, drop_seed);
    return scenario_to_text(layout, ls);
}

}  // namespace jcam
