#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "schedsec/builtin_systems.hpp"
#include "schedsec/lti_estimation.hpp"
#include "schedsec/rng.hpp"
#include "schedsec/scheduling.hpp"

namespace testing {

using schedsec::Bits;
using schedsec::Schedule;

inline const std::vector<schedsec::PreparedSystem> &three_process() {
    static const auto prepared = schedsec::prepare_systems(schedsec::three_process_systems());
    return prepared;
}

inline const std::vector<schedsec::TraceLadder> &three_process_ladders() {
    static const auto ladders = schedsec::ladders_of(three_process());
    return ladders;
}

inline Bits bits(const std::string &s) {
    Bits out;
    for (char c : s)
        if (c == '0' || c == '1')
            out.push_back(static_cast<std::uint8_t>(c - '0'));
    return out;
}

inline Schedule schedule(std::initializer_list<const char *> rows) {
    std::vector<Bits> out;
    for (const char *r : rows)
        out.push_back(bits(r));
    return Schedule(out);
}

/// Exclusive schedule from per-slot owner labels.
inline Schedule from_labels(const std::vector<std::size_t> &labels, std::size_t sensors) {
    std::vector<Bits> rows(sensors, Bits(labels.size(), 0));
    for (std::size_t k = 0; k < labels.size(); ++k)
        rows[labels[k]][k] = 1;
    return Schedule(rows);
}

/// Random exclusive schedule (labels uniform over sensors).
inline Schedule random_exclusive(std::size_t sensors, std::size_t period, schedsec::Engine &eng) {
    std::vector<std::size_t> labels(period);
    for (auto &l : labels)
        l = static_cast<std::size_t>(schedsec::uniform_below(eng, sensors));
    return from_labels(labels, sensors);
}

/// Random exclusive schedule in which every sensor owns at least one slot.
inline Schedule random_covering(std::size_t sensors, std::size_t period, schedsec::Engine &eng) {
    for (;;) {
        Schedule s = random_exclusive(sensors, period, eng);
        bool all = true;
        for (std::size_t i = 0; i < sensors; ++i) {
            const auto &r = s.row(i);
            all = all && std::find(r.begin(), r.end(), std::uint8_t{1}) != r.end();
        }
        if (all)
            return s;
    }
}

} // namespace testing
