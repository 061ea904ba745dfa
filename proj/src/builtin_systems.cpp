#include "schedsec/builtin_systems.hpp"

namespace schedsec {

namespace {

LinearSystem make(double a11, double a12, double a22, double q1, double q2) {
    LinearSystem s;
    s.A = Matrix{{a11, a12}, {0.0, a22}};
    s.C = Matrix{{1.0, 1.0}};
    s.Q = Matrix{{q1, 0.0}, {0.0, q2}};
    s.R = Matrix{{1.0}};
    s.Pi = Matrix::Identity(2, 2);
    return s;
}

} // namespace

std::vector<LinearSystem> three_process_systems() {
    return {
        make(1.01, 0.5, 0.2, 0.2, 0.2),
        make(1.02, 0.4, 0.15, 0.1, 0.15),
        make(1.03, 0.6, 0.1, 0.1, 0.2),
    };
}

} // namespace schedsec
