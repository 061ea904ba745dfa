// Command-line front end over the C interface.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "schedsec/schedsec.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kOther = 1, kUsage = 2, kValidation = 3, kInfeasible = 4, kBudget = 5 };

struct Failure {
    int exit_code;
    std::string message;
};

int exit_code_for(schedsec_status s) {
    switch (s) {
    case SCHEDSEC_OK:
        return kOk;
    case SCHEDSEC_INVALID_ARGUMENT:
        return kUsage;
    case SCHEDSEC_VALIDATION:
        return kValidation;
    case SCHEDSEC_INFEASIBLE:
        return kInfeasible;
    case SCHEDSEC_BUDGET:
        return kBudget;
    default:
        return kOther;
    }
}

void check(schedsec_status s) {
    if (s != SCHEDSEC_OK)
        throw Failure{exit_code_for(s), std::string(schedsec_status_name(s)) + ": " + schedsec_last_error()};
}

[[noreturn]] void usage_error(const std::string &msg) { throw Failure{kUsage, msg}; }

struct SystemsDeleter {
    void operator()(schedsec_systems *p) const { schedsec_systems_free(p); }
};
struct ScheduleDeleter {
    void operator()(schedsec_schedule *p) const { schedsec_schedule_free(p); }
};
struct ShiftDeleter {
    void operator()(schedsec_shift *p) const { schedsec_shift_free(p); }
};
using Systems = std::unique_ptr<schedsec_systems, SystemsDeleter>;
using Sched = std::unique_ptr<schedsec_schedule, ScheduleDeleter>;
using Shift = std::unique_ptr<schedsec_shift, ShiftDeleter>;

// Takes ownership of a string returned by the library.
std::string take(char *s) {
    std::string out = s ? s : "";
    schedsec_free_string(s);
    return out;
}

std::string fnv1a64(const std::string &data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string slurp(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Failure{kOther, "i/o error: cannot open " + path};
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// Collects files written into one output directory and the run manifest.
class Run {
public:
    Run(std::string out_dir, std::vector<std::string> argv) : dir_(std::move(out_dir)) {
        manifest_["tool"] = "schedsec";
        manifest_["version"] = schedsec_version();
        manifest_["arguments"] = std::move(argv);
        manifest_["inputs"] = json::object();
        manifest_["parameters"] = json::object();
    }

    void input(const std::string &role, const std::string &path) {
        manifest_["inputs"][role] = {{"path", path}, {"fnv1a64", fnv1a64(slurp(path))}};
    }
    void builtin_input(const std::string &role) { manifest_["inputs"][role] = "builtin:three_process"; }
    void parameter(const std::string &key, json value) { manifest_["parameters"][key] = std::move(value); }

    void write(const std::string &name, const std::string &content) {
        check(schedsec_write_file((fs::path(dir_) / name).string().c_str(), content.c_str()));
        outputs_.push_back({{"file", name}, {"fnv1a64", fnv1a64(content)}});
    }

    void finish() {
        manifest_["outputs"] = outputs_;
        const std::string text = manifest_.dump(2) + "\n";
        check(schedsec_write_file((fs::path(dir_) / "run_manifest.json").string().c_str(), text.c_str()));
    }

    const std::string &dir() const { return dir_; }

private:
    std::string dir_;
    json manifest_;
    json outputs_ = json::array();
};

struct Common {
    std::string systems;
    std::string out = "out";
    std::string format = "csv";
    std::uint64_t seed = 0;
    std::size_t trials = 200;
    std::size_t horizon = 100;
    std::size_t threads = 0;
    std::string periods; // empty: N..max(N, 6) for N loaded systems
    std::string reproduce_periods = "3";
    std::optional<std::size_t> target;
    std::string mode = "same-duty";
    std::size_t sensors = 3;
    std::string schedule;
    std::string policy;
    std::string attack;
    std::string method = "bnb";
    std::string factors;
    std::uint64_t samples = 0;
    std::size_t ladder = 16;
    bool monte_carlo = false;
    bool resample_sigma = false;
};

schedsec_format format_of(const Common &c) {
    if (c.format == "csv")
        return SCHEDSEC_FORMAT_CSV;
    if (c.format == "json")
        return SCHEDSEC_FORMAT_JSON;
    usage_error("--format must be csv or json");
}

std::string ext(const Common &c) { return c.format == "json" ? ".json" : ".csv"; }

Systems load_systems(const Common &c, Run &run) {
    schedsec_systems *p = nullptr;
    if (c.systems.empty()) {
        check(schedsec_systems_builtin(&p));
        run.builtin_input("systems");
    } else {
        check(schedsec_systems_load(c.systems.c_str(), &p));
        run.input("systems", c.systems);
    }
    return Systems(p);
}

Sched load_schedule(const std::string &path, const std::string &role, Run &run) {
    if (path.empty())
        usage_error("--" + role + " <file> is required");
    schedsec_schedule *p = nullptr;
    check(schedsec_schedule_load(path.c_str(), &p));
    run.input(role, path);
    return Sched(p);
}

Shift load_shift(const std::string &path, Run &run) {
    if (path.empty())
        return nullptr;
    schedsec_shift *p = nullptr;
    check(schedsec_shift_load(path.c_str(), &p));
    run.input("attack", path);
    return Shift(p);
}

// "3", "1,2,4" or "2-5" (mixed allowed).
std::vector<std::size_t> parse_periods(const std::string &text, std::size_t sensors) {
    std::vector<std::size_t> out;
    if (text.empty()) {
        for (std::size_t t = sensors; t <= std::max<std::size_t>(sensors, 6); ++t)
            out.push_back(t);
        return out;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            const auto dash = item.find('-');
            if (dash == std::string::npos) {
                out.push_back(std::stoul(item));
            } else {
                const std::size_t lo = std::stoul(item.substr(0, dash)), hi = std::stoul(item.substr(dash + 1));
                if (lo > hi)
                    usage_error("bad period range " + item);
                for (std::size_t t = lo; t <= hi; ++t)
                    out.push_back(t);
            }
        } catch (const std::logic_error &) {
            usage_error("bad period list '" + text + "'");
        }
    }
    if (out.empty())
        usage_error("--periods is empty");
    return out;
}

// "1/3,1/3,1/2"
void parse_factors(const std::string &text, std::vector<std::int64_t> &n, std::vector<std::int64_t> &d) {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto slash = item.find('/');
        if (slash == std::string::npos)
            usage_error("duty factor '" + item + "' is not of the form n/d");
        try {
            n.push_back(std::stoll(item.substr(0, slash)));
            d.push_back(std::stoll(item.substr(slash + 1)));
        } catch (const std::logic_error &) {
            usage_error("duty factor '" + item + "' is not of the form n/d");
        }
    }
    if (n.empty())
        usage_error("--factors is empty");
}

schedsec_sim_config sim_config(const Common &c, std::size_t trials) {
    schedsec_sim_config cfg = schedsec_sim_config_default();
    cfg.horizon = c.horizon;
    cfg.seed = c.seed;
    cfg.trials = trials;
    cfg.threads = c.threads;
    cfg.resample_sigma = c.resample_sigma ? 1 : 0;
    return cfg;
}

std::string schedule_json(const schedsec_schedule *s) {
    char *out = nullptr;
    check(schedsec_schedule_to_json(s, &out));
    return take(out);
}

std::string shift_json(const schedsec_shift *s) {
    char *out = nullptr;
    check(schedsec_shift_to_json(s, &out));
    return take(out);
}

std::string taus_text(const schedsec_shift *s) {
    std::string out = "(";
    for (std::size_t i = 0; i < schedsec_shift_size(s); ++i)
        out += (i ? "," : "") + std::to_string(schedsec_shift_at(s, i));
    return out + ")";
}

// ---- subcommands ----

void cmd_steady_state(const Common &c, Run &run) {
    Systems sys = load_systems(c, run);
    run.parameter("ladder_entries", c.ladder);
    if (format_of(c) == SCHEDSEC_FORMAT_JSON) {
        char *out = nullptr;
        check(schedsec_systems_report_json(sys.get(), c.ladder, &out));
        run.write("steady_state.json", take(out));
        return;
    }
    std::ostringstream os;
    os << "system,t,trace\n";
    os.precision(17);
    for (std::size_t i = 0; i < schedsec_systems_count(sys.get()); ++i)
        for (std::size_t t = 0; t < c.ladder; ++t) {
            double v = 0.0;
            check(schedsec_systems_ladder(sys.get(), i, t, &v));
            os << i << ',' << t << ',' << v << '\n';
        }
    run.write("steady_state.csv", os.str());
}

void cmd_schedule(const Common &c, Run &run) {
    Systems sys = load_systems(c, run);
    const auto periods = parse_periods(c.periods, schedsec_systems_count(sys.get()));
    run.parameter("periods", periods);
    schedsec_schedule *p = nullptr;
    double cost = 0.0;
    check(schedsec_schedule_search(sys.get(), periods.data(), periods.size(), &p, &cost));
    Sched sched(p);
    run.write("schedule.json", schedule_json(sched.get()));
    char *report = nullptr;
    check(schedsec_cost_report(sys.get(), sched.get(), nullptr, format_of(c), &report));
    run.write("schedule_cost" + ext(c), take(report));
    std::cout << "optimal period " << schedsec_schedule_period(sched.get()) << ", cost " << cost << "\n";
}

void cmd_cost(const Common &c, Run &run) {
    Systems sys = load_systems(c, run);
    Sched sched = load_schedule(c.schedule, "schedule", run);
    Shift attack = load_shift(c.attack, run);
    char *report = nullptr;
    check(schedsec_cost_report(sys.get(), sched.get(), attack.get(), format_of(c), &report));
    run.write("cost" + ext(c), take(report));
}

void cmd_attack(const std::string &kind, const Common &c, Run &run) {
    Sched sched = load_schedule(c.schedule, "schedule", run);
    schedsec_shift *p = nullptr;
    if (kind == "optimal") {
        schedsec_attack_method m = SCHEDSEC_METHOD_BNB;
        if (c.method == "brute")
            m = SCHEDSEC_METHOD_BRUTE_FORCE;
        else if (c.method != "bnb")
            usage_error("--method must be bnb or brute");
        run.parameter("method", c.method);
        char *report = nullptr;
        const schedsec_status s = schedsec_attack_optimal(sched.get(), m, &p, &report);
        if (report)
            run.write("attack_report.json", take(report));
        check(s);
    } else if (kind == "random") {
        run.parameter("seed", c.seed);
        check(schedsec_attack_random(sched.get(), c.seed, &p));
    } else {
        if (!c.target)
            usage_error("attack isolate needs --target <i>");
        run.parameter("target", *c.target);
        check(schedsec_attack_isolate(sched.get(), *c.target, &p));
    }
    Shift attack(p);
    run.write("attack.json", shift_json(attack.get()));
    char *blocked = nullptr;
    check(schedsec_attack_blocked_json(sched.get(), attack.get(), &blocked));
    const std::string b = take(blocked);
    std::cout << "attack " << taus_text(attack.get()) << ", spoofed_count " << schedsec_shift_spoofed_count(attack.get())
              << ", blocked sensors " << b << "\n";
}

Sched construct_policy(const Common &c, Run &run) {
    schedsec_schedule *p = nullptr;
    if (!c.factors.empty()) {
        std::vector<std::int64_t> n, d;
        parse_factors(c.factors, n, d);
        run.parameter("factors", c.factors);
        check(schedsec_defend_construct(n.data(), d.data(), n.size(), &p));
    } else if (c.mode == "shortest-period") {
        run.parameter("mode", c.mode);
        run.parameter("sensors", c.sensors);
        check(schedsec_defend_shortest_period(c.sensors, &p));
    } else if (c.mode == "same-duty") {
        run.parameter("mode", c.mode);
        Sched ref;
        if (c.schedule.empty()) {
            // reference: the optimal attack-free schedule for the loaded systems
            Systems sys = load_systems(c, run);
            const auto periods = parse_periods(c.periods, schedsec_systems_count(sys.get()));
            run.parameter("periods", periods);
            schedsec_schedule *r = nullptr;
            check(schedsec_schedule_search(sys.get(), periods.data(), periods.size(), &r, nullptr));
            ref.reset(r);
        } else {
            ref = load_schedule(c.schedule, "schedule", run);
        }
        check(schedsec_defend_same_duty(ref.get(), &p));
    } else {
        usage_error("--mode must be same-duty or shortest-period");
    }
    return Sched(p);
}

void cmd_defend(const std::string &kind, const Common &c, Run &run) {
    if (kind == "construct") {
        Sched policy = construct_policy(c, run);
        run.write("policy.json", schedule_json(policy.get()));
        std::cout << "policy period " << schedsec_schedule_period(policy.get()) << "\n";
        return;
    }
    Sched policy = load_schedule(c.policy, "policy", run);
    if (kind == "bounds") {
        Systems sys = load_systems(c, run);
        char *out = nullptr;
        double lo = 0.0, hi = 0.0;
        check(schedsec_defend_bounds(sys.get(), policy.get(), &out, &lo, &hi));
        run.write("bounds.json", take(out));
        std::cout << "bounds [" << lo << ", " << hi << "]\n";
        return;
    }
    run.parameter("samples", c.samples);
    run.parameter("seed", c.seed);
    int invariant = 0;
    char *report = nullptr;
    check(schedsec_verify_shift_invariance(policy.get(), c.samples, c.seed, &invariant, &report));
    run.write("invariance.json", take(report));
    std::cout << (invariant ? "shift invariant" : "not shift invariant") << "\n";
}

void cmd_simulate(const Common &c, Run &run) {
    Systems sys = load_systems(c, run);
    Shift attack = load_shift(c.attack, run);
    run.parameter("horizon", c.horizon);
    if (c.monte_carlo) {
        Sched policy = load_schedule(c.policy.empty() ? c.schedule : c.policy, "policy", run);
        run.parameter("seed", c.seed);
        run.parameter("trials", c.trials);
        run.parameter("resample_sigma", c.resample_sigma);
        const schedsec_sim_config cfg = sim_config(c, c.trials);
        char *out = nullptr;
        check(schedsec_simulate_monte_carlo(sys.get(), policy.get(), attack.get(), &cfg, format_of(c), &out));
        run.write("monte_carlo" + ext(c), take(out));
        return;
    }
    Sched sched = load_schedule(c.schedule, "schedule", run);
    const schedsec_sim_config cfg = sim_config(c, 1);
    char *out = nullptr;
    check(schedsec_simulate_series(sys.get(), sched.get(), attack.get(), &cfg, format_of(c), &out));
    run.write("series" + ext(c), take(out));
}

// Full pipeline on one set of systems: optimal schedule, optimal attack, both
// defenses with bounds, and the data series behind the cost-versus-time plots.
void cmd_reproduce(const Common &c, Run &run) {
    Systems sys = load_systems(c, run);
    const auto periods = parse_periods(c.reproduce_periods, schedsec_systems_count(sys.get()));
    run.parameter("periods", periods);
    run.parameter("seed", c.seed);
    run.parameter("trials", c.trials);
    run.parameter("horizon", c.horizon);

    char *text = nullptr;
    check(schedsec_systems_report_json(sys.get(), c.ladder, &text));
    run.write("steady_state.json", take(text));

    schedsec_schedule *sp = nullptr;
    double cost = 0.0;
    check(schedsec_schedule_search(sys.get(), periods.data(), periods.size(), &sp, &cost));
    Sched sched(sp);
    run.write("schedule.json", schedule_json(sched.get()));
    check(schedsec_cost_report(sys.get(), sched.get(), nullptr, SCHEDSEC_FORMAT_CSV, &text));
    run.write("schedule_cost.csv", take(text));

    json summary;
    summary["schedule"] = {{"period", schedsec_schedule_period(sched.get())}, {"cost", cost}};

    schedsec_shift *ap = nullptr;
    check(schedsec_attack_optimal(sched.get(), SCHEDSEC_METHOD_BNB, &ap, &text));
    Shift attack(ap);
    run.write("attack_report.json", take(text));
    run.write("attack.json", shift_json(attack.get()));
    schedsec_shift *bp = nullptr;
    check(schedsec_attack_optimal(sched.get(), SCHEDSEC_METHOD_BRUTE_FORCE, &bp, &text));
    Shift brute(bp);
    run.write("attack_report_brute_force.json", take(text));
    check(schedsec_attack_blocked_json(sched.get(), attack.get(), &text));
    const std::string blocked = take(text);
    summary["attack"] = {{"taus", json::parse(shift_json(attack.get()))["taus"]},
                         {"spoofed_count", schedsec_shift_spoofed_count(attack.get())},
                         {"blocked_sensors", json::parse(blocked)},
                         {"brute_force_spoofed_count", schedsec_shift_spoofed_count(brute.get())}};
    std::cout << "optimal schedule period " << schedsec_schedule_period(sched.get()) << ", cost " << cost << "\n";
    std::cout << "optimal attack " << taus_text(attack.get()) << ": spoofed_count "
              << schedsec_shift_spoofed_count(attack.get()) << ", blocked sensors " << blocked << "\n";

    const schedsec_sim_config one = sim_config(c, 1);
    check(schedsec_simulate_series(sys.get(), sched.get(), nullptr, &one, SCHEDSEC_FORMAT_CSV, &text));
    run.write("series_no_attack.csv", take(text));
    check(schedsec_simulate_series(sys.get(), sched.get(), attack.get(), &one, SCHEDSEC_FORMAT_CSV, &text));
    run.write("series_optimal_attack.csv", take(text));
    check(schedsec_simulate_series(sys.get(), sched.get(), attack.get(), &one, SCHEDSEC_FORMAT_JSON, &text));
    run.write("series_optimal_attack.json", take(text));
    if (!c.attack.empty()) {
        // an extra fixed attack to compare against the synthesized one
        Shift extra = load_shift(c.attack, run);
        check(schedsec_simulate_series(sys.get(), sched.get(), extra.get(), &one, SCHEDSEC_FORMAT_CSV, &text));
        run.write("series_given_attack.csv", take(text));
        check(schedsec_simulate_series(sys.get(), sched.get(), extra.get(), &one, SCHEDSEC_FORMAT_JSON, &text));
        run.write("series_given_attack.json", take(text));
        check(schedsec_attack_blocked_json(sched.get(), extra.get(), &text));
        summary["given_attack"] = {{"taus", json::parse(shift_json(extra.get()))["taus"]},
                                   {"spoofed_count", schedsec_shift_spoofed_count(extra.get())},
                                   {"blocked_sensors", json::parse(take(text))}};
    }

    // The same-duty defense keeps the attack-free duty factors.
    schedsec_schedule *pp = nullptr;
    check(schedsec_defend_same_duty(sched.get(), &pp));
    Sched same(pp);
    check(schedsec_defend_shortest_period(schedsec_systems_count(sys.get()), &pp));
    Sched shortest(pp);

    schedsec_sim_config mc = sim_config(c, c.trials);
    mc.resample_sigma = 1;
    const std::pair<const char *, const schedsec_schedule *> defenses[] = {{"same_duty", same.get()},
                                                                           {"shortest_period", shortest.get()}};
    for (const auto &[name, policy] : defenses) {
        const std::string tag(name);
        run.write("policy_" + tag + ".json", schedule_json(policy));
        double lo = 0.0, hi = 0.0;
        check(schedsec_defend_bounds(sys.get(), policy, &text, &lo, &hi));
        run.write("bounds_" + tag + ".json", take(text));
        check(schedsec_simulate_monte_carlo(sys.get(), policy, nullptr, &mc, SCHEDSEC_FORMAT_CSV, &text));
        run.write("monte_carlo_" + tag + ".csv", take(text));
        check(schedsec_simulate_monte_carlo(sys.get(), policy, nullptr, &mc, SCHEDSEC_FORMAT_JSON, &text));
        const std::string mc_json = take(text);
        run.write("monte_carlo_" + tag + ".json", mc_json);
        const json parsed = json::parse(mc_json);
        summary["defenses"][tag] = {{"period", schedsec_schedule_period(policy)},
                                    {"lower_bound", lo},
                                    {"upper_bound", hi},
                                    {"mean_cost", parsed["mean_cost"]},
                                    {"cost_half_width", parsed["cost_half_width"]}};
        std::cout << tag << " defense: period " << schedsec_schedule_period(policy) << ", bounds [" << lo << ", "
                  << hi << "], mean cost under random attacks " << parsed["mean_cost"].get<double>() << " +/- "
                  << parsed["cost_half_width"].get<double>() << "\n";
    }
    run.write("summary.json", summary.dump(2) + "\n");
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Sensor scheduling, time-synchronization attacks and shift-invariant defenses"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(schedsec_version()));
    Common c;
    std::uint64_t budget = 0;
    app.add_option("--budget", budget, "Cap on exhaustive enumeration sizes (overrides SCHEDSEC_BUDGET)");

    auto add_common = [&](CLI::App *sub) {
        sub->add_option("--systems", c.systems, "Systems JSON file (default: bundled three-process systems)");
        sub->add_option("--out", c.out, "Output directory")->capture_default_str();
        sub->add_option("--format", c.format, "csv or json")->capture_default_str();
    };

    auto *steady = app.add_subcommand("steady-state", "Steady-state covariances and trace ladders");
    add_common(steady);
    steady->add_option("--ladder", c.ladder, "Ladder entries to report")->capture_default_str();

    auto *schedule = app.add_subcommand("schedule", "Optimal attack-free schedule by exhaustive search");
    add_common(schedule);
    schedule->add_option("--periods", c.periods, "Candidate periods, e.g. 3 or 3-6 or 3,5 (default: N to max(N, 6))");

    auto *cost = app.add_subcommand("cost", "Average cost of a schedule, optionally under an attack");
    add_common(cost);
    cost->add_option("--schedule", c.schedule, "Schedule JSON")->required();
    cost->add_option("--attack", c.attack, "Shift tuple JSON");

    auto *attack = app.add_subcommand("attack", "Synthesize a time-synchronization attack");
    attack->require_subcommand(1);
    std::string attack_kind;
    for (const char *kind : {"optimal", "random", "isolate"}) {
        auto *sub = attack->add_subcommand(kind);
        add_common(sub);
        sub->add_option("--schedule", c.schedule, "Schedule JSON")->required();
        if (std::string(kind) == "optimal")
            sub->add_option("--method", c.method, "bnb or brute")->capture_default_str();
        if (std::string(kind) == "random")
            sub->add_option("--seed", c.seed, "Random seed")->capture_default_str();
        if (std::string(kind) == "isolate")
            sub->add_option("--target", c.target, "Sensor to block (0-based)")->required();
        sub->callback([&attack_kind, kind] { attack_kind = kind; });
    }

    auto *defend = app.add_subcommand("defend", "Shift-invariant defenses");
    defend->require_subcommand(1);
    std::string defend_kind;
    for (const char *kind : {"construct", "bounds", "verify"}) {
        auto *sub = defend->add_subcommand(kind);
        add_common(sub);
        if (std::string(kind) == "construct") {
            sub->add_option("--mode", c.mode, "same-duty or shortest-period")->capture_default_str();
            sub->add_option("-n,--sensors", c.sensors, "Sensor count for shortest-period")->capture_default_str();
            sub->add_option("--schedule", c.schedule, "Reference schedule for same-duty");
            sub->add_option("--periods", c.periods, "Search periods when no reference is given (default: N to max(N, 6))");
            sub->add_option("--factors", c.factors, "Explicit duty factors, e.g. 1/3,1/3,1/3");
        } else {
            sub->add_option("--policy", c.policy, "Policy set JSON")->required();
        }
        if (std::string(kind) == "verify") {
            sub->add_option("--samples", c.samples, "Random shift tuples per oversize tuple")->capture_default_str();
            sub->add_option("--seed", c.seed, "Sampling seed")->capture_default_str();
        }
        sub->callback([&defend_kind, kind] { defend_kind = kind; });
    }

    auto *verify = app.add_subcommand("verify", "Property checks");
    verify->require_subcommand(1);
    auto *verify_si = verify->add_subcommand("shift-invariance");
    add_common(verify_si);
    verify_si->add_option("--policy", c.policy, "Policy set JSON")->required();
    verify_si->add_option("--samples", c.samples, "Random shift tuples per oversize tuple")->capture_default_str();
    verify_si->add_option("--seed", c.seed, "Sampling seed")->capture_default_str();

    auto *simulate = app.add_subcommand("simulate", "Exact covariance series or Monte Carlo cost");
    add_common(simulate);
    simulate->add_option("--schedule", c.schedule, "Schedule JSON");
    simulate->add_option("--policy", c.policy, "Policy set JSON (Monte Carlo)");
    simulate->add_option("--attack", c.attack, "Fixed shift tuple JSON (default: none, or uniform for Monte Carlo)");
    simulate->add_option("--horizon", c.horizon, "Time steps")->capture_default_str();
    simulate->add_option("--seed", c.seed, "Random seed")->capture_default_str();
    simulate->add_option("--trials", c.trials, "Monte Carlo trials")->capture_default_str();
    simulate->add_option("--threads", c.threads, "Worker threads (0: all cores)")->capture_default_str();
    simulate->add_flag("--monte-carlo", c.monte_carlo, "Average over random attacks");
    simulate->add_flag("--resample-sigma", c.resample_sigma, "Redraw interleaving vectors per trial");

    auto *reproduce = app.add_subcommand("reproduce-paper", "Run the full pipeline on the bundled systems");
    add_common(reproduce);
    reproduce->add_option("--periods", c.reproduce_periods, "Candidate schedule periods")->capture_default_str();
    reproduce->add_option("--seed", c.seed, "Random seed")->capture_default_str();
    reproduce->add_option("--trials", c.trials, "Monte Carlo trials")->capture_default_str();
    reproduce->add_option("--horizon", c.horizon, "Time steps")->capture_default_str();
    reproduce->add_option("--threads", c.threads, "Worker threads (0: all cores)")->capture_default_str();
    reproduce->add_option("--attack", c.attack, "Extra fixed shift tuple JSON to simulate alongside");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kUsage;
    }

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        if (budget)
            schedsec_set_budget(budget);
        format_of(c);
        Run run(c.out, args);
        if (steady->parsed())
            cmd_steady_state(c, run);
        else if (schedule->parsed())
            cmd_schedule(c, run);
        else if (cost->parsed())
            cmd_cost(c, run);
        else if (attack->parsed())
            cmd_attack(attack_kind, c, run);
        else if (defend->parsed())
            cmd_defend(defend_kind, c, run);
        else if (verify->parsed())
            cmd_defend("verify", c, run);
        else if (simulate->parsed())
            cmd_simulate(c, run);
        else if (reproduce->parsed())
            cmd_reproduce(c, run);
        run.finish();
    } catch (const Failure &f) {
        std::cerr << "error: " << f.message << "\n";
        return f.exit_code;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kOther;
    }
    return kOk;
}
