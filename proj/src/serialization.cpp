#include "schedsec/serialization.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace schedsec {

using nlohmann::json;

namespace {

json parse(const std::string &text, const std::string &what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error &e) {
        throw_validation(what + ": malformed JSON (" + std::string(e.what()) + ")");
    }
}

const json &field(const json &obj, const std::string &key, const std::string &where) {
    if (!obj.is_object())
        throw_validation(where + ": expected an object");
    auto it = obj.find(key);
    if (it == obj.end())
        throw_validation(where + ": missing field " + key);
    return *it;
}

Matrix matrix_from(const json &j, const std::string &where) {
    if (j.is_number())
        return Matrix::Constant(1, 1, j.get<double>());
    if (!j.is_array() || j.empty())
        throw_validation(where + ": expected a non-empty list of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    Eigen::Index cols = -1;
    Matrix m;
    for (Eigen::Index r = 0; r < rows; ++r) {
        const json &row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || row.empty())
            throw_validation(where + ": row " + std::to_string(r) + " is not a non-empty list");
        if (cols < 0) {
            cols = static_cast<Eigen::Index>(row.size());
            m.resize(rows, cols);
        } else if (static_cast<Eigen::Index>(row.size()) != cols) {
            throw_validation(where + ": row " + std::to_string(r) + " has " + std::to_string(row.size()) +
                             " entries, expected " + std::to_string(cols));
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            const json &v = row[static_cast<std::size_t>(c)];
            if (!v.is_number())
                throw_validation(where + ": entry (" + std::to_string(r) + "," + std::to_string(c) +
                                 ") is not a number");
            m(r, c) = v.get<double>();
            if (!std::isfinite(m(r, c)))
                throw_validation(where + ": entry (" + std::to_string(r) + "," + std::to_string(c) +
                                 ") is not finite");
        }
    }
    return m;
}

json matrix_to(const Matrix &m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<Bits> rows_from(const json &j, const std::string &where) {
    if (!j.is_array())
        throw_validation(where + ": expected a list of rows");
    std::vector<Bits> rows;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const json &row = j[i];
        if (!row.is_array())
            throw_validation(where + "[" + std::to_string(i) + "]: expected a list of 0/1 entries");
        Bits bits;
        for (std::size_t k = 0; k < row.size(); ++k) {
            const json &v = row[k];
            if (!v.is_number_integer() || (v.get<int>() != 0 && v.get<int>() != 1))
                throw_validation(where + "[" + std::to_string(i) + "][" + std::to_string(k) + "]: expected 0 or 1");
            bits.push_back(static_cast<std::uint8_t>(v.get<int>()));
        }
        rows.push_back(std::move(bits));
    }
    return rows;
}

Schedule schedule_from(const json &j, const std::string &what) {
    const std::vector<Bits> rows = rows_from(field(j, "rows", what), what + " rows");
    const json &T = field(j, "T", what);
    if (!T.is_number_unsigned())
        throw_validation(what + ": T must be a non-negative integer");
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (rows[i].size() != T.get<std::size_t>())
            throw_validation(what + " rows[" + std::to_string(i) + "]: length " + std::to_string(rows[i].size()) +
                             " differs from T = " + std::to_string(T.get<std::size_t>()));
    try {
        return Schedule(rows);
    } catch (const Error &e) {
        throw_validation(what + ": " + e.what());
    }
}

json schedule_to(const Schedule &s) {
    json rows = json::array();
    for (const auto &r : s.rows()) {
        json row = json::array();
        for (auto b : r)
            row.push_back(static_cast<int>(b));
        rows.push_back(std::move(row));
    }
    return json{{"T", s.period()}, {"rows", std::move(rows)}};
}

json optional_number(const std::optional<double> &v) { return v ? json(*v) : json(nullptr); }

std::string dump(const json &j) { return j.dump(2) + "\n"; }

} // namespace

std::string format_double(double v) {
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::vector<LinearSystem> systems_from_json(const std::string &text) {
    const json doc = parse(text, "systems file");
    const json &list = doc.is_object() ? field(doc, "systems", "systems file") : doc;
    if (!list.is_array() || list.empty())
        throw_validation("systems file: expected a non-empty list of systems");
    std::vector<LinearSystem> out;
    for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string where = "systems[" + std::to_string(i) + "]";
        const json &s = list[i];
        LinearSystem sys;
        sys.A = matrix_from(field(s, "A", where), where + ".A");
        sys.C = matrix_from(field(s, "C", where), where + ".C");
        sys.Q = matrix_from(field(s, "Q", where), where + ".Q");
        sys.R = matrix_from(field(s, "R", where), where + ".R");
        if (s.contains("Pi"))
            sys.Pi = matrix_from(s["Pi"], where + ".Pi");
        else
            sys.Pi = Matrix::Identity(sys.A.rows(), sys.A.rows());
        out.push_back(std::move(sys));
    }
    return out;
}

std::string systems_to_json(const std::vector<LinearSystem> &systems) {
    json list = json::array();
    for (const auto &s : systems)
        list.push_back(
            {{"A", matrix_to(s.A)}, {"C", matrix_to(s.C)}, {"Q", matrix_to(s.Q)}, {"R", matrix_to(s.R)}, {"Pi", matrix_to(s.Pi)}});
    return dump(json{{"systems", std::move(list)}});
}

Schedule schedule_from_json(const std::string &text) { return schedule_from(parse(text, "schedule"), "schedule"); }

std::string schedule_to_json(const Schedule &sched) { return dump(schedule_to(sched)); }

PolicySet policy_set_from_json(const std::string &text) {
    const json doc = parse(text, "policy set");
    Schedule sched = schedule_from(doc, "policy set");
    const json &fs = field(doc, "factors", "policy set");
    if (!fs.is_array())
        throw_validation("policy set: factors must be a list");
    std::vector<DutyFactor> factors;
    for (std::size_t i = 0; i < fs.size(); ++i) {
        const std::string where = "policy set factors[" + std::to_string(i) + "]";
        const json &n = field(fs[i], "n", where), &d = field(fs[i], "d", where);
        if (!n.is_number_integer() || !d.is_number_integer())
            throw_validation(where + ": n and d must be integers");
        try {
            factors.emplace_back(n.get<std::int64_t>(), d.get<std::int64_t>());
        } catch (const Error &e) {
            throw_validation(where + ": " + e.what());
        }
    }
    try {
        return PolicySet(std::move(sched), std::move(factors));
    } catch (const Error &e) {
        throw_validation(std::string("policy set: ") + e.what());
    }
}

std::string policy_set_to_json(const PolicySet &ps) {
    json j = schedule_to(ps.schedule());
    json fs = json::array();
    for (const auto &f : ps.factors())
        fs.push_back({{"n", f.n()}, {"d", f.d()}});
    j["factors"] = std::move(fs);
    return dump(j);
}

ShiftTuple shift_from_json(const std::string &text) {
    const json doc = parse(text, "shift tuple");
    const json &taus = field(doc, "taus", "shift tuple");
    if (!taus.is_array())
        throw_validation("shift tuple: taus must be a list");
    ShiftTuple t;
    for (std::size_t i = 0; i < taus.size(); ++i) {
        if (!taus[i].is_number_unsigned())
            throw_validation("shift tuple taus[" + std::to_string(i) + "]: expected a non-negative integer");
        t.taus.push_back(taus[i].get<std::size_t>());
    }
    return t;
}

std::string shift_to_json(const ShiftTuple &attack) { return dump(json{{"taus", attack.taus}}); }

std::string cost_report_csv(const CostReport &report) {
    std::ostringstream os;
    os << "sensor_index,average_trace,divergent\n";
    for (std::size_t i = 0; i < report.per_sensor.size(); ++i) {
        const auto &c = report.per_sensor[i];
        os << i << ',' << (c ? format_double(*c) : "") << ',' << (c ? 0 : 1) << '\n';
    }
    os << "total," << (report.total ? format_double(*report.total) : "") << ',' << (report.total ? 0 : 1) << '\n';
    return os.str();
}

namespace {

json cost_report_to(const CostReport &report) {
    json per = json::array();
    for (std::size_t i = 0; i < report.per_sensor.size(); ++i)
        per.push_back({{"sensor_index", i},
                       {"average_trace", optional_number(report.per_sensor[i])},
                       {"divergent", !report.per_sensor[i].has_value()}});
    return json{{"sensors", std::move(per)}, {"total", optional_number(report.total)}, {"divergent", report.divergent()}};
}

} // namespace

std::string cost_report_json(const CostReport &report) { return dump(cost_report_to(report)); }

std::string steady_state_json(const std::vector<PreparedSystem> &prepared, std::size_t ladder_entries) {
    json list = json::array();
    for (std::size_t i = 0; i < prepared.size(); ++i) {
        const auto &p = prepared[i];
        json ladder = json::array();
        for (std::size_t t = 0; t < ladder_entries; ++t)
            ladder.push_back(p.steady.ladder.at(t));
        list.push_back({{"system", i},
                        {"P_bar", matrix_to(p.steady.P_bar)},
                        {"trace", p.steady.P_bar.trace()},
                        {"spectral_radius", p.report.spectral_radius},
                        {"unstable", p.report.unstable},
                        {"iterations", p.steady.iterations},
                        {"residual", p.steady.residual},
                        {"ladder", std::move(ladder)},
                        {"warnings", p.report.warnings}});
    }
    return dump(json{{"systems", std::move(list)}});
}

std::string series_csv(const CovarianceSeries &series) {
    std::ostringstream os;
    os << "k,sensor,trace,running_mean,divergent_flag\n";
    const std::size_t N = series.per_sensor_traces.size();
    for (std::size_t k = 0; k < series.horizon; ++k)
        for (std::size_t i = 0; i < N; ++i) {
            const double tr = series.per_sensor_traces[i][k], rm = series.per_sensor_running_mean[i][k];
            os << k << ',' << i << ',' << (std::isfinite(tr) ? format_double(tr) : "overflow") << ','
               << (std::isfinite(rm) ? format_double(rm) : "overflow") << ',' << (series.divergent[i] ? 1 : 0)
               << '\n';
        }
    return os.str();
}

std::string series_json(const CovarianceSeries &series) {
    json j;
    j["horizon"] = series.horizon;
    j["period"] = series.period;
    j["divergent"] = series.divergent;
    json overflow = json::array(), growth = json::array(), final_mean = json::array();
    for (std::size_t i = 0; i < series.divergent.size(); ++i) {
        overflow.push_back(series.overflow_at[i] ? json(*series.overflow_at[i]) : json(nullptr));
        growth.push_back(optional_number(series.growth_factor[i]));
        const double rm = series.per_sensor_running_mean[i].back();
        final_mean.push_back(std::isfinite(rm) ? json(rm) : json("overflow"));
    }
    j["overflow_at"] = std::move(overflow);
    j["growth_factor_per_period"] = std::move(growth);
    j["final_running_mean"] = std::move(final_mean);
    const double total = series.total_running_mean.back();
    j["final_total_running_mean"] = std::isfinite(total) ? json(total) : json("overflow");
    j["periodic_average"] = series.periodic_average ? cost_report_to(*series.periodic_average) : json("transient-only");
    return dump(j);
}

std::string monte_carlo_csv(const MonteCarloResult &result) {
    std::ostringstream os;
    os << "k,mean_running_cost,half_width\n";
    for (std::size_t k = 0; k < result.horizon; ++k) {
        const double m = result.mean_running_cost[k], h = result.half_width[k];
        os << k << ',' << (std::isfinite(m) ? format_double(m) : "overflow") << ','
           << (std::isfinite(h) ? format_double(h) : "overflow") << '\n';
    }
    return os.str();
}

std::string bounds_json(const BoundsReport &bounds) {
    return dump(json{{"lower", bounds.lower},
                     {"upper", bounds.upper},
                     {"period", bounds.period},
                     {"receptions_per_period", bounds.per_sensor_receptions}});
}

std::string monte_carlo_json(const MonteCarloResult &result, const std::optional<BoundsReport> &bounds) {
    json j;
    j["trials"] = result.trials;
    j["horizon"] = result.horizon;
    j["mean_cost"] = optional_number(result.mean_cost);
    j["cost_half_width"] = result.cost_half_width;
    const double m = result.mean_running_cost.back();
    j["final_mean_running_cost"] = std::isfinite(m) ? json(m) : json("overflow");
    json costs = json::array();
    for (const auto &c : result.trial_costs)
        costs.push_back(optional_number(c));
    j["trial_costs"] = std::move(costs);
    if (bounds)
        j["bounds"] = {{"lower", bounds->lower}, {"upper", bounds->upper}};
    return dump(j);
}

std::string attack_json(const OptimalAttack &result, const std::string &method) {
    json j;
    j["method"] = method;
    j["taus"] = result.attack ? json(result.attack->taus) : json(nullptr);
    j["spoofed_count"] = result.spoofed_count ? json(*result.spoofed_count) : json(nullptr);
    j["target"] = result.target ? json(*result.target) : json(nullptr);
    json per = json::array();
    for (const auto &c : result.per_target_costs)
        per.push_back(c ? json(*c) : json(nullptr));
    j["per_target_spoofed_count"] = std::move(per);
    return dump(j);
}

std::string read_text_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::io, "cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text_file(const std::string &path, const std::string &content) {
    const std::filesystem::path p(path);
    std::error_code ec;
    if (p.has_parent_path())
        std::filesystem::create_directories(p.parent_path(), ec);
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorCode::io, "cannot write " + path);
    out << content;
    if (!out)
        throw Error(ErrorCode::io, "write failed for " + path);
}

} // namespace schedsec
