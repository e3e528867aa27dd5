#pragma once

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "pmetric/graph_core.hpp"

namespace pmetric::testing {

inline MetricGraph theta(double a = 1.0, double b = 1.0, double c = 1.0) {
    return MetricGraph(2, {{0, 1, "a", a}, {0, 1, "b", b}, {0, 1, "c", c}});
}

inline MetricGraph two_loop(double a = 1.0, double b = 1.0) {
    return MetricGraph(1, {{0, 0, "a", a}, {0, 0, "b", b}});
}

inline MetricGraph dumbbell(double a = 1.0, double b = 1.0, double c = 1.0) {
    return MetricGraph(2, {{0, 0, "a", a}, {0, 1, "b", b}, {1, 1, "c", c}});
}

inline MetricGraph k4() {
    return MetricGraph(4, {{0, 1, "a", 1.0}, {0, 2, "b", 1.0}, {0, 3, "c", 1.0},
                           {1, 2, "d", 1.0}, {1, 3, "e", 1.0}, {2, 3, "f", 1.0}});
}

inline std::vector<MetricGraph> bundled_graphs() { return {theta(), two_loop(), dumbbell(), k4()}; }

// trace(A^p) by repeated dense multiplication; independent of any
// enumeration code.
inline double trace_power(const TransitionStructure& ts, int p) {
    const auto n = static_cast<Eigen::Index>(ts.size());
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) a(i, j) = ts.allowed(i, j) ? 1.0 : 0.0;
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
    for (int k = 0; k < p; ++k) m = m * a;
    return m.trace();
}

inline bool near_rel(double actual, double expected, double rel, double abs_floor = 1e-300) {
    return std::abs(actual - expected) <= rel * std::max(std::abs(expected), abs_floor);
}

} // namespace pmetric::testing
