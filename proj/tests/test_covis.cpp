#include <doctest.h>

#include "monocheck/covis.hpp"
#include "monocheck/error.hpp"
#include "support.hpp"

using namespace monocheck;

TEST_SUITE("covis") {

TEST_CASE("threshold table") {
  CHECK(covis::covisibility_threshold(30) == 5);
  CHECK(covis::covisibility_threshold(50) == 5);
  CHECK(covis::covisibility_threshold(51) == 6);
  CHECK(covis::covisibility_threshold(200) == 20);
  CHECK(covis::covisibility_threshold(1) == 5);
  CHECK(covis::covisibility_threshold(100, {2, 0.25}) == 25);
  CHECK_THROWS_AS(covis::covisibility_threshold(0), Error);
}

TEST_CASE("identical static frames are seen by every training frame") {
  const int n = 12;
  std::vector<covis::FlowPair> pairs(n, {flow::FlowField(16, 9), flow::FlowField(16, 9)});
  const auto h = covis::covisibility_heatmap(pairs);
  CHECK(h.n_train == n);
  for (int c : h.counts) CHECK(c == n);
  const auto m = covis::covisibility_mask(h);
  CHECK(m.beta == 5);
  CHECK(m.mask.count() == 16u * 9u);
}

TEST_CASE("fully occluded pixels count zero") {
  std::vector<covis::FlowPair> pairs(4, {flow::FlowField(30, 4, {10, 0}), flow::FlowField(30, 4)});
  const auto h = covis::covisibility_heatmap(pairs);
  for (int c : h.counts) CHECK(c == 0);
  CHECK(covis::covisibility_mask(h).mask.count() == 0);
}

TEST_CASE("one consistent and one inconsistent frame") {
  std::vector<covis::FlowPair> pairs = {
      {flow::FlowField(8, 8, {1, 0}), flow::FlowField(8, 8, {-1, 0})},
      {flow::FlowField(8, 8, {1, 0}), flow::FlowField(8, 8, {3, 0})}};
  const auto h = covis::covisibility_heatmap(pairs);
  CHECK(h.at(2, 2) == 1);
}

TEST_CASE("heatmap is independent of the thread count") {
  std::vector<covis::FlowPair> pairs;
  for (int i = 0; i < 9; ++i) {
    flow::FlowField f(20, 15), b(20, 15);
    for (auto& v : f.data) v = {test::uniform(-2, 2), test::uniform(-2, 2)};
    for (auto& v : b.data) v = {test::uniform(-2, 2), test::uniform(-2, 2)};
    pairs.emplace_back(f, b);
  }
  CHECK(covis::covisibility_heatmap(pairs, 1).counts == covis::covisibility_heatmap(pairs, 4).counts);
}

TEST_CASE("mask is monotone in beta and matches the count rule") {
  std::mt19937_64 g(5);
  for (int trial = 0; trial < 1000; ++trial) {
    covis::CovisibilityHeatmap h;
    h.width = 7;
    h.height = 5;
    h.n_train = std::uniform_int_distribution<int>(1, 300)(g);
    std::uniform_int_distribution<int> count(0, h.n_train);
    for (int i = 0; i < 35; ++i) h.counts.push_back(count(g));
    const auto lo = covis::covisibility_mask(h, {3, 0.05});
    const auto hi = covis::covisibility_mask(h, {8, 0.2});
    REQUIRE(lo.beta <= hi.beta);
    for (std::size_t i = 0; i < 35; ++i) {
      CHECK(static_cast<bool>(lo.mask.data[i]) == (h.counts[i] >= lo.beta));
      if (hi.mask.data[i]) CHECK(lo.mask.data[i]);
    }
  }
}

TEST_CASE("heatmap input validation") {
  std::vector<covis::FlowPair> none;
  CHECK_THROWS_AS(covis::covisibility_heatmap(none), Error);
  std::vector<covis::FlowPair> mixed = {{flow::FlowField(4, 4), flow::FlowField(4, 4)},
                                        {flow::FlowField(5, 4), flow::FlowField(5, 4)}};
  CHECK_THROWS_AS(covis::covisibility_heatmap(mixed), Error);
}

}
