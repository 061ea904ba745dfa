#include "schedsec/schedsec.h"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <new>
#include <optional>
#include <string>

#include <json.hpp>

#include "schedsec/attack.hpp"
#include "schedsec/builtin_systems.hpp"
#include "schedsec/protocol_sequences.hpp"
#include "schedsec/scheduling.hpp"
#include "schedsec/serialization.hpp"
#include "schedsec/simulation.hpp"

using namespace schedsec;

struct schedsec_systems {
    std::vector<PreparedSystem> prepared;
    std::vector<TraceLadder> ladders;
};

struct schedsec_schedule {
    Schedule schedule;
    std::optional<std::vector<DutyFactor>> factors;
};

struct schedsec_shift {
    ShiftTuple tuple;
};

namespace {

thread_local std::string g_last_error;
std::atomic<std::uint64_t> g_budget{0};

Budget current_budget() {
    const std::uint64_t b = g_budget.load();
    if (b == 0)
        return Budget::from_env();
    return Budget{b};
}

schedsec_status to_status(ErrorCode c) {
    switch (c) {
    case ErrorCode::invalid_argument:
        return SCHEDSEC_INVALID_ARGUMENT;
    case ErrorCode::validation:
        return SCHEDSEC_VALIDATION;
    case ErrorCode::infeasible:
        return SCHEDSEC_INFEASIBLE;
    case ErrorCode::budget_exceeded:
        return SCHEDSEC_BUDGET;
    case ErrorCode::convergence:
        return SCHEDSEC_CONVERGENCE;
    case ErrorCode::numerical:
        return SCHEDSEC_NUMERICAL;
    case ErrorCode::io:
        return SCHEDSEC_IO;
    }
    return SCHEDSEC_INTERNAL;
}

template <class F> schedsec_status guarded(F &&f) {
    g_last_error.clear();
    try {
        f();
        return SCHEDSEC_OK;
    } catch (const Error &e) {
        g_last_error = e.what();
        return to_status(e.code());
    } catch (const std::bad_alloc &) {
        g_last_error = "out of memory";
        return SCHEDSEC_INTERNAL;
    } catch (const std::exception &e) {
        g_last_error = e.what();
        return SCHEDSEC_INTERNAL;
    }
}

void require(const void *p, const char *what) {
    if (!p)
        throw_invalid(std::string(what) + " is NULL");
}

char *to_c_string(const std::string &s) {
    char *out = static_cast<char *>(std::malloc(s.size() + 1));
    if (!out)
        throw std::bad_alloc();
    std::memcpy(out, s.data(), s.size() + 1);
    return out;
}

schedsec_systems *make_systems(const std::vector<LinearSystem> &systems) {
    auto *h = new schedsec_systems;
    try {
        h->prepared = prepare_systems(systems);
        h->ladders = ladders_of(h->prepared);
    } catch (...) {
        delete h;
        throw;
    }
    return h;
}

schedsec_schedule *make_schedule(const std::string &text) {
    const auto doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_object() && doc.contains("factors")) {
        PolicySet ps = policy_set_from_json(text);
        return new schedsec_schedule{ps.schedule(), ps.factors()};
    }
    return new schedsec_schedule{schedule_from_json(text), std::nullopt};
}

schedsec_schedule *make_policy(const PolicySet &ps) { return new schedsec_schedule{ps.schedule(), ps.factors()}; }

std::vector<DutyFactor> factors_for(const schedsec_schedule *s) {
    return s->factors ? *s->factors : factors_of(s->schedule);
}

PolicySet policy_of(const schedsec_schedule *s) { return PolicySet(s->schedule, factors_for(s)); }

ShiftTuple attack_or_none(const schedsec_shift *attack, std::size_t sensors) {
    if (!attack)
        return ShiftTuple{std::vector<std::size_t>(sensors, 0)};
    if (attack->tuple.size() != sensors)
        throw_invalid("shift tuple has " + std::to_string(attack->tuple.size()) + " offsets for " +
                      std::to_string(sensors) + " sensors");
    return attack->tuple;
}

void check_matching(const schedsec_systems *systems, const schedsec_schedule *sched) {
    if (systems->prepared.size() != sched->schedule.sensors())
        throw_invalid("schedule has " + std::to_string(sched->schedule.sensors()) + " sensors but " +
                      std::to_string(systems->prepared.size()) + " systems are loaded");
}

SimConfig sim_config(const schedsec_sim_config *cfg) {
    const schedsec_sim_config c = cfg ? *cfg : schedsec_sim_config_default();
    SimConfig out;
    out.horizon = c.horizon;
    out.seed = c.seed;
    out.trials = c.trials;
    out.threads = c.threads;
    return out;
}

} // namespace

extern "C" {

const char *schedsec_version(void) { return SCHEDSEC_VERSION; }

const char *schedsec_last_error(void) { return g_last_error.c_str(); }

const char *schedsec_status_name(schedsec_status status) {
    switch (status) {
    case SCHEDSEC_OK:
        return "ok";
    case SCHEDSEC_INVALID_ARGUMENT:
        return "invalid argument";
    case SCHEDSEC_VALIDATION:
        return "validation error";
    case SCHEDSEC_INFEASIBLE:
        return "infeasible";
    case SCHEDSEC_BUDGET:
        return "budget exceeded";
    case SCHEDSEC_CONVERGENCE:
        return "convergence failure";
    case SCHEDSEC_NUMERICAL:
        return "numerical failure";
    case SCHEDSEC_IO:
        return "i/o error";
    case SCHEDSEC_INTERNAL:
        return "internal error";
    }
    return "unknown";
}

void schedsec_free_string(char *s) { std::free(s); }

void schedsec_set_budget(uint64_t max_enumeration) { g_budget.store(max_enumeration); }

uint64_t schedsec_budget(void) { return current_budget().max_enumeration; }

schedsec_status schedsec_systems_builtin(schedsec_systems **out) {
    return guarded([&] {
        require(out, "out");
        *out = make_systems(three_process_systems());
    });
}

schedsec_status schedsec_systems_from_json(const char *json, schedsec_systems **out) {
    return guarded([&] {
        require(json, "json");
        require(out, "out");
        *out = make_systems(systems_from_json(json));
    });
}

schedsec_status schedsec_systems_load(const char *path, schedsec_systems **out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = make_systems(systems_from_json(read_text_file(path)));
    });
}

void schedsec_systems_free(schedsec_systems *systems) { delete systems; }

size_t schedsec_systems_count(const schedsec_systems *systems) { return systems ? systems->prepared.size() : 0; }

schedsec_status schedsec_systems_ladder(const schedsec_systems *systems, size_t sensor, size_t t, double *out) {
    return guarded([&] {
        require(systems, "systems");
        require(out, "out");
        if (sensor >= systems->ladders.size())
            throw_invalid("sensor " + std::to_string(sensor) + " out of range");
        *out = systems->ladders[sensor].at(t);
    });
}

schedsec_status schedsec_systems_report_json(const schedsec_systems *systems, size_t ladder_entries, char **out) {
    return guarded([&] {
        require(systems, "systems");
        require(out, "out");
        *out = to_c_string(steady_state_json(systems->prepared, ladder_entries));
    });
}

schedsec_status schedsec_schedule_from_json(const char *json, schedsec_schedule **out) {
    return guarded([&] {
        require(json, "json");
        require(out, "out");
        *out = make_schedule(json);
    });
}

schedsec_status schedsec_schedule_load(const char *path, schedsec_schedule **out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = make_schedule(read_text_file(path));
    });
}

schedsec_status schedsec_schedule_from_rows(const uint8_t *bits, size_t sensors, size_t period,
                                            schedsec_schedule **out) {
    return guarded([&] {
        require(bits, "bits");
        require(out, "out");
        std::vector<Bits> rows(sensors);
        for (std::size_t i = 0; i < sensors; ++i)
            rows[i].assign(bits + i * period, bits + (i + 1) * period);
        *out = new schedsec_schedule{Schedule(std::move(rows)), std::nullopt};
    });
}

schedsec_status schedsec_schedule_to_json(const schedsec_schedule *sched, char **out) {
    return guarded([&] {
        require(sched, "schedule");
        require(out, "out");
        *out = to_c_string(sched->factors ? policy_set_to_json(PolicySet(sched->schedule, *sched->factors))
                                          : schedule_to_json(sched->schedule));
    });
}

void schedsec_schedule_free(schedsec_schedule *sched) { delete sched; }

size_t schedsec_schedule_sensors(const schedsec_schedule *sched) { return sched ? sched->schedule.sensors() : 0; }

size_t schedsec_schedule_period(const schedsec_schedule *sched) { return sched ? sched->schedule.period() : 0; }

int schedsec_schedule_bit(const schedsec_schedule *sched, size_t sensor, size_t slot) {
    if (!sched || sensor >= sched->schedule.sensors() || slot >= sched->schedule.period())
        return -1;
    return sched->schedule.row(sensor)[slot];
}

int schedsec_schedule_is_exclusive(const schedsec_schedule *sched) {
    return sched && sched->schedule.is_exclusive() ? 1 : 0;
}

int schedsec_schedule_has_factors(const schedsec_schedule *sched) { return sched && sched->factors ? 1 : 0; }

schedsec_status schedsec_schedule_search(const schedsec_systems *systems, const size_t *periods, size_t n_periods,
                                         schedsec_schedule **out, double *cost) {
    return guarded([&] {
        require(systems, "systems");
        require(periods, "periods");
        require(out, "out");
        const std::vector<std::size_t> ps(periods, periods + n_periods);
        const ScheduleSearchResult r = optimal_schedule_search(systems->ladders, ps, current_budget());
        if (cost)
            *cost = *r.cost.total;
        *out = new schedsec_schedule{r.schedule, std::nullopt};
    });
}

schedsec_status schedsec_cost_report(const schedsec_systems *systems, const schedsec_schedule *sched,
                                     const schedsec_shift *attack, schedsec_format format, char **out) {
    return guarded([&] {
        require(systems, "systems");
        require(sched, "schedule");
        require(out, "out");
        check_matching(systems, sched);
        const auto lambda = attacked_reception(sched->schedule, attack_or_none(attack, sched->schedule.sensors()));
        const CostReport rep = average_cost(lambda, systems->ladders);
        *out = to_c_string(format == SCHEDSEC_FORMAT_JSON ? cost_report_json(rep) : cost_report_csv(rep));
    });
}

schedsec_status schedsec_cost_total(const schedsec_systems *systems, const schedsec_schedule *sched,
                                    const schedsec_shift *attack, double *total, int *divergent) {
    return guarded([&] {
        require(systems, "systems");
        require(sched, "schedule");
        require(total, "total");
        check_matching(systems, sched);
        const auto lambda = attacked_reception(sched->schedule, attack_or_none(attack, sched->schedule.sensors()));
        const CostReport rep = average_cost(lambda, systems->ladders);
        *total = rep.total.value_or(0.0);
        if (divergent)
            *divergent = rep.divergent() ? 1 : 0;
    });
}

schedsec_status schedsec_shift_from_json(const char *json, schedsec_shift **out) {
    return guarded([&] {
        require(json, "json");
        require(out, "out");
        *out = new schedsec_shift{shift_from_json(json)};
    });
}

schedsec_status schedsec_shift_load(const char *path, schedsec_shift **out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = new schedsec_shift{shift_from_json(read_text_file(path))};
    });
}

schedsec_status schedsec_shift_from_taus(const size_t *taus, size_t n, schedsec_shift **out) {
    return guarded([&] {
        require(taus, "taus");
        require(out, "out");
        *out = new schedsec_shift{ShiftTuple{std::vector<std::size_t>(taus, taus + n)}};
    });
}

schedsec_status schedsec_shift_to_json(const schedsec_shift *shift, char **out) {
    return guarded([&] {
        require(shift, "shift");
        require(out, "out");
        *out = to_c_string(shift_to_json(shift->tuple));
    });
}

void schedsec_shift_free(schedsec_shift *shift) { delete shift; }

size_t schedsec_shift_size(const schedsec_shift *shift) { return shift ? shift->tuple.size() : 0; }

size_t schedsec_shift_at(const schedsec_shift *shift, size_t sensor) {
    return shift && sensor < shift->tuple.size() ? shift->tuple.taus[sensor] : 0;
}

size_t schedsec_shift_spoofed_count(const schedsec_shift *shift) { return shift ? shift->tuple.spoofed_count() : 0; }

schedsec_status schedsec_attack_random(const schedsec_schedule *sched, uint64_t seed, schedsec_shift **out) {
    return guarded([&] {
        require(sched, "schedule");
        require(out, "out");
        *out = new schedsec_shift{random_attack(sched->schedule.period(), sched->schedule.sensors(), seed)};
    });
}

schedsec_status schedsec_attack_isolate(const schedsec_schedule *sched, size_t target, schedsec_shift **out) {
    return guarded([&] {
        require(sched, "schedule");
        require(out, "out");
        *out = new schedsec_shift{isolate_sensor_attack(sched->schedule, target, current_budget())};
    });
}

schedsec_status schedsec_attack_optimal(const schedsec_schedule *sched, schedsec_attack_method method,
                                        schedsec_shift **out, char **report_json) {
    return guarded([&] {
        require(sched, "schedule");
        require(out, "out");
        const bool brute = method == SCHEDSEC_METHOD_BRUTE_FORCE;
        if (!brute && method != SCHEDSEC_METHOD_BNB)
            throw_invalid("unknown attack method");
        const OptimalAttack r =
            brute ? brute_force_optimal_attack(sched->schedule, current_budget()) : bnb_optimal_attack(sched->schedule);
        if (report_json)
            *report_json = to_c_string(attack_json(r, brute ? "brute-force" : "branch-and-bound"));
        if (!r.attack)
            throw Error(ErrorCode::infeasible, "no shift tuple blocks any sensor of this schedule");
        *out = new schedsec_shift{*r.attack};
    });
}

schedsec_status schedsec_attack_blocked_json(const schedsec_schedule *sched, const schedsec_shift *attack,
                                             char **out) {
    return guarded([&] {
        require(sched, "schedule");
        require(attack, "attack");
        require(out, "out");
        const auto blocked = blocked_sensors(attacked_reception(sched->schedule, attack->tuple));
        *out = to_c_string(nlohmann::json(blocked).dump());
    });
}

schedsec_status schedsec_defend_construct(const int64_t *n, const int64_t *d, size_t sensors,
                                          schedsec_schedule **out) {
    return guarded([&] {
        require(n, "n");
        require(d, "d");
        require(out, "out");
        std::vector<DutyFactor> f;
        for (std::size_t i = 0; i < sensors; ++i)
            f.emplace_back(n[i], d[i]);
        *out = make_policy(construct_shift_invariant(f));
    });
}

schedsec_status schedsec_defend_same_duty(const schedsec_schedule *reference, schedsec_schedule **out) {
    return guarded([&] {
        require(reference, "reference");
        require(out, "out");
        *out = make_policy(construct_shift_invariant(factors_of(reference->schedule)));
    });
}

schedsec_status schedsec_defend_shortest_period(size_t sensors, schedsec_schedule **out) {
    return guarded([&] {
        require(out, "out");
        *out = make_policy(shortest_period_policies(sensors));
    });
}

schedsec_status schedsec_defend_bounds(const schedsec_systems *systems, const schedsec_schedule *policy,
                                       char **out_json, double *lower, double *upper) {
    return guarded([&] {
        require(systems, "systems");
        require(policy, "policy");
        check_matching(systems, policy);
        const BoundsReport b = bounds(factors_for(policy), systems->ladders);
        if (lower)
            *lower = b.lower;
        if (upper)
            *upper = b.upper;
        if (out_json)
            *out_json = to_c_string(bounds_json(b));
    });
}

schedsec_status schedsec_verify_shift_invariance(const schedsec_schedule *sched, uint64_t samples, uint64_t seed,
                                                 int *invariant, char **report_json) {
    return guarded([&] {
        require(sched, "schedule");
        InvarianceOptions opts;
        opts.exhaustive_cap = current_budget().max_enumeration;
        opts.samples = static_cast<std::size_t>(samples);
        opts.seed = seed;
        const InvarianceReport r = is_shift_invariant(sched->schedule, opts);
        if (invariant)
            *invariant = r.invariant ? 1 : 0;
        if (report_json) {
            nlohmann::json j{{"invariant", r.invariant}, {"sampled", r.sampled}};
            if (r.witness)
                j["witness"] = {{"sensors", r.witness->tuple},
                                {"shifts", r.witness->shifts},
                                {"value", r.witness->value},
                                {"expected", r.witness->expected}};
            else
                j["witness"] = nullptr;
            *report_json = to_c_string(j.dump(2) + "\n");
        }
    });
}

schedsec_sim_config schedsec_sim_config_default(void) { return schedsec_sim_config{100, 0, 1, 0, 0}; }

schedsec_status schedsec_simulate_series(const schedsec_systems *systems, const schedsec_schedule *sched,
                                         const schedsec_shift *attack, const schedsec_sim_config *cfg,
                                         schedsec_format format, char **out) {
    return guarded([&] {
        require(systems, "systems");
        require(sched, "schedule");
        require(out, "out");
        check_matching(systems, sched);
        const CovarianceSeries s = exact_covariance_series(
            systems->prepared, sched->schedule, attack_or_none(attack, sched->schedule.sensors()), sim_config(cfg));
        *out = to_c_string(format == SCHEDSEC_FORMAT_JSON ? series_json(s) : series_csv(s));
    });
}

namespace {

MonteCarloResult run_monte_carlo(const schedsec_systems *systems, const schedsec_schedule *policy,
                                 const schedsec_shift *attack, const schedsec_sim_config *cfg) {
    require(systems, "systems");
    require(policy, "policy");
    check_matching(systems, policy);
    AttackModel model;
    if (attack) {
        model.kind = AttackModel::Kind::fixed;
        model.fixed = attack_or_none(attack, policy->schedule.sensors());
    }
    model.resample_sigma = cfg && cfg->resample_sigma;
    if (model.resample_sigma)
        return monte_carlo_expected_cost(systems->prepared, policy_of(policy), model, sim_config(cfg));
    return monte_carlo_expected_cost(systems->prepared, policy->schedule, model, sim_config(cfg));
}

} // namespace

schedsec_status schedsec_simulate_monte_carlo(const schedsec_systems *systems, const schedsec_schedule *policy,
                                              const schedsec_shift *attack, const schedsec_sim_config *cfg,
                                              schedsec_format format, char **out) {
    return guarded([&] {
        require(out, "out");
        const MonteCarloResult r = run_monte_carlo(systems, policy, attack, cfg);
        std::optional<BoundsReport> b;
        if (policy->factors)
            b = bounds(*policy->factors, systems->ladders);
        *out = to_c_string(format == SCHEDSEC_FORMAT_JSON ? monte_carlo_json(r, b) : monte_carlo_csv(r));
    });
}

schedsec_status schedsec_monte_carlo_cost(const schedsec_systems *systems, const schedsec_schedule *policy,
                                          const schedsec_shift *attack, const schedsec_sim_config *cfg, double *mean,
                                          double *half_width) {
    return guarded([&] {
        require(mean, "mean");
        const MonteCarloResult r = run_monte_carlo(systems, policy, attack, cfg);
        if (!r.mean_cost)
            throw Error(ErrorCode::numerical, "some Monte Carlo trial diverged; the mean cost is unbounded");
        *mean = *r.mean_cost;
        if (half_width)
            *half_width = r.cost_half_width;
    });
}

schedsec_status schedsec_write_file(const char *path, const char *content) {
    return guarded([&] {
        require(path, "path");
        require(content, "content");
        write_text_file(path, content);
    });
}

} // extern "C"
