#include <doctest.h>

#include <set>
#include <vector>

#include "siglab/random.hpp"

using namespace siglab;

TEST_CASE("streams are deterministic") {
    RandomStream a(42, {1, 2, 3});
    RandomStream b(42, {1, 2, 3});
    auto ea = a.engine();
    auto eb = b.engine();
    for (int i = 0; i < 100; ++i) CHECK(ea() == eb());
}

TEST_CASE("distinct seeds and paths give distinct states") {
    std::set<std::uint64_t> states;
    for (std::uint64_t seed : {1ull, 2ull, 42ull}) {
        for (std::uint64_t c : {0ull, 1ull, 2ull, 77ull}) {
            for (std::uint64_t r : {0ull, 1ull, 1023ull, 1024ull}) {
                states.insert(RandomStream(seed, {c, r}).state());
            }
        }
    }
    CHECK(states.size() == 3 * 4 * 4);
}

TEST_CASE("child extends the path") {
    RandomStream base(7, {5});
    CHECK(base.child(9).state() == RandomStream(7, {5, 9}).state());
    CHECK(base.child(9).child(2).state() == RandomStream(7, {5, 9, 2}).state());
    // Sibling children differ.
    CHECK(base.child(0).state() != base.child(1).state());
    // Path structure matters, not just the multiset of indices.
    CHECK(RandomStream(7, {1, 2}).state() != RandomStream(7, {2, 1}).state());
}

TEST_CASE("engines from equal streams produce equal draws") {
    RandomStream s(123, {0});
    std::vector<double> first, second;
    {
        auto eng = s.engine();
        std::normal_distribution<double> n;
        for (int i = 0; i < 50; ++i) first.push_back(n(eng));
    }
    {
        auto eng = s.engine();
        std::normal_distribution<double> n;
        for (int i = 0; i < 50; ++i) second.push_back(n(eng));
    }
    CHECK(first == second);
}
