#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

namespace riskcal {

struct TestStep {
    std::size_t index = 0;  // hypothesis index in the caller's grid
    double p_value = 1.0;
};

// Hypotheses tested first to last; a walk stops at its first non-rejection.
using TestPath = std::vector<TestStep>;

struct CompatibleSet {
    std::map<std::size_t, double> rejected;  // grid index -> p-value
    double delta = 0.0;
    std::size_t budget_splits = 1;           // m: the per-test level is delta / m

    double per_test_level() const { return delta / static_cast<double>(budget_splits); }
    bool contains(std::size_t index) const { return rejected.count(index) != 0; }
    bool empty() const { return rejected.empty(); }
    std::size_t size() const { return rejected.size(); }
};

// Rejects every hypothesis with p <= delta / m, m = number of p-values.
CompatibleSet bonferroni(std::span<const double> p_values, double delta);

// Fixed sequence testing over m' paths, each walked at level delta / m'.
// The result is the union of the rejected prefixes.
CompatibleSet fixed_sequence_test(std::span<const TestPath> paths, double delta);

}  // namespace riskcal
