#include <random>

#include "doctest.h"
#include "riskcal/error.hpp"
#include "riskcal/multiple_testing.hpp"

using namespace riskcal;

namespace {

TestPath path_of(std::initializer_list<double> ps, std::size_t first_index = 0) {
    TestPath p;
    for (double v : ps) p.push_back({first_index++, v});
    return p;
}

}  // namespace

TEST_SUITE("multiple-testing") {

TEST_CASE("bonferroni") {
    const std::vector<double> zeros(4, 0.0);
    CHECK(bonferroni(zeros, 0.05).size() == 4);
    const std::vector<double> ones(4, 1.0);
    CHECK(bonferroni(ones, 0.05).empty());
    const std::vector<double> mixed{0.004, 0.2};
    const auto set = bonferroni(mixed, 0.01);
    CHECK(set.size() == 1);
    CHECK(set.contains(0));
    CHECK(set.per_test_level() == doctest::Approx(0.005));
}

TEST_CASE("fixed sequence stops at the first non-rejection") {
    const std::vector<TestPath> one{path_of({0.001, 0.2, 0.0005})};
    const auto set = fixed_sequence_test(one, 0.05);
    CHECK(set.size() == 1);
    CHECK(set.contains(0));
    CHECK(set.budget_splits == 1);
}

TEST_CASE("first p above the level on every path gives the empty set") {
    const std::vector<TestPath> paths{path_of({0.06, 0.0}), path_of({0.051, 0.0}, 2)};
    CHECK(fixed_sequence_test(paths, 0.1).empty());
}

TEST_CASE("two paths are each walked at half the budget") {
    // Path A: 0.04 <= 0.05 then 0.06 > 0.05. Path B: 0.01, 0.05 both <= 0.05.
    const std::vector<TestPath> paths{path_of({0.04, 0.06}, 0), path_of({0.01, 0.05}, 2)};
    const auto set = fixed_sequence_test(paths, 0.1);
    CHECK(set.budget_splits == 2);
    CHECK(set.per_test_level() == doctest::Approx(0.05));
    CHECK(set.size() == 3);
    CHECK(set.contains(0));
    CHECK_FALSE(set.contains(1));
    CHECK(set.contains(2));
    CHECK(set.contains(3));
    CHECK(set.rejected.at(3) == 0.05);
}

TEST_CASE("one path at full budget equals the single-path walk") {
    const TestPath p = path_of({0.01, 0.09, 0.1, 0.11});
    const std::vector<TestPath> paths{p};
    CHECK(fixed_sequence_test(paths, 0.1).size() == 3);
}

TEST_CASE("input validation") {
    CHECK_THROWS_AS(fixed_sequence_test(std::vector<TestPath>{path_of({0.1})}, 0.0), ValidationError);
    CHECK_THROWS_AS(fixed_sequence_test(std::vector<TestPath>{path_of({1.5})}, 0.1), ValidationError);
    TestPath dup{{3, 0.01}, {3, 0.02}};
    CHECK_THROWS_AS(fixed_sequence_test(std::vector<TestPath>{dup}, 0.1), ValidationError);
    CHECK_THROWS_AS(fixed_sequence_test(std::vector<TestPath>{}, 0.1), ValidationError);
}

TEST_CASE("rejected sets are prefix-closed on random paths") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 0.15);
    for (int rep = 0; rep < 500; ++rep) {
        std::vector<TestPath> paths(1 + rng() % 4);
        std::size_t next = 0;
        for (auto& p : paths) {
            for (int k = 0; k < 6; ++k) p.push_back({next++, u(rng)});
        }
        const auto set = fixed_sequence_test(paths, 0.2);
        for (const auto& p : paths) {
            bool stopped = false;
            for (const auto& step : p) {
                if (set.contains(step.index)) {
                    CHECK_FALSE(stopped);
                    CHECK(step.p_value <= set.per_test_level());
                } else {
                    stopped = true;
                }
            }
        }
    }
}

TEST_CASE("family-wise error stays below delta when every hypothesis is null") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int runs = 4000;
    for (double delta : {0.05, 0.1}) {
        int any = 0;
        for (int r = 0; r < runs; ++r) {
            std::vector<TestPath> paths(3);
            std::size_t next = 0;
            for (auto& p : paths) {
                for (int k = 0; k < 5; ++k) p.push_back({next++, u(rng)});
            }
            any += !fixed_sequence_test(paths, delta).empty();
        }
        CHECK(static_cast<double>(any) / runs <= delta + 3 * std::sqrt(delta * (1 - delta) / runs));
    }
}

}  // TEST_SUITE
