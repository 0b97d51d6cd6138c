#include "riskcal/multiple_testing.hpp"

#include <set>

#include "riskcal/error.hpp"

namespace riskcal {

namespace {

void check_delta(double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("delta must lie in (0,1)");
}

}  // namespace

CompatibleSet bonferroni(std::span<const double> p_values, double delta) {
    check_delta(delta);
    if (p_values.empty()) throw ValidationError("bonferroni needs at least one p-value");
    CompatibleSet out;
    out.delta = delta;
    out.budget_splits = p_values.size();
    const double level = out.per_test_level();
    for (std::size_t i = 0; i < p_values.size(); ++i) {
        if (p_values[i] <= level) out.rejected.emplace(i, p_values[i]);
    }
    return out;
}

CompatibleSet fixed_sequence_test(std::span<const TestPath> paths, double delta) {
    check_delta(delta);
    if (paths.empty()) throw ValidationError("fixed sequence testing needs at least one path");
    CompatibleSet out;
    out.delta = delta;
    out.budget_splits = paths.size();
    const double level = out.per_test_level();
    for (const auto& path : paths) {
        std::set<std::size_t> seen;
        for (const auto& step : path) {
            if (!seen.insert(step.index).second) throw ValidationError("test path repeats a hypothesis");
            if (!(step.p_value >= 0.0 && step.p_value <= 1.0)) throw ValidationError("p-value outside [0,1]");
        }
        for (const auto& step : path) {
            if (step.p_value > level) break;
            out.rejected.emplace(step.index, step.p_value);
        }
    }
    return out;
}

}  // namespace riskcal
