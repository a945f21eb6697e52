#include <doctest.h>

#include "monocheck/error.hpp"
#include "monocheck/flow.hpp"
#include "support.hpp"

using namespace monocheck;
using monocheck::test::uniform;

TEST_SUITE("flow") {

TEST_CASE("sample_flow: constant field") {
  const flow::FlowField f(8, 6, {1.0, 0.0});
  const auto s = flow::sample_flow(f, {3.7, 2.2});
  CHECK((s - Eigen::Vector2d(1, 0)).norm() < 1e-15);
}

TEST_CASE("sample_flow: midpoint of a linear field") {
  flow::FlowField f(2, 1);
  f.at(0, 0) = {0, 0};
  f.at(1, 0) = {2, 0};
  const auto s = flow::sample_flow(f, {0.5, 0.0});
  CHECK((s - Eigen::Vector2d(1, 0)).norm() < 1e-15);
}

TEST_CASE("sample_flow: integer positions return stored values exactly") {
  flow::FlowField f(13, 9);
  for (auto& v : f.data) v = {uniform(-50, 50), uniform(-50, 50)};
  for (int v = 0; v < f.height; ++v)
    for (int u = 0; u < f.width; ++u) CHECK(flow::sample_flow(f, {u, v}) == f.at(u, v));
}

TEST_CASE("sample_flow: bilinear reproduces affine fields") {
  flow::FlowField f(10, 10);
  for (int v = 0; v < 10; ++v)
    for (int u = 0; u < 10; ++u) f.at(u, v) = {0.3 * u - 0.2 * v + 1, 0.1 * u * 0 + 0.7 * v};
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector2d uv(uniform(0, 9), uniform(0, 9));
    const Eigen::Vector2d want(0.3 * uv.x() - 0.2 * uv.y() + 1, 0.7 * uv.y());
    CHECK((flow::sample_flow(f, uv) - want).norm() < 1e-12);
  }
}

TEST_CASE("sample_flow: outside the grid is rejected") {
  const flow::FlowField f(4, 4);
  CHECK_THROWS_AS(flow::sample_flow(f, {-0.1, 1}), Error);
  CHECK_THROWS_AS(flow::sample_flow(f, {1, 3.01}), Error);
  CHECK_NOTHROW(flow::sample_flow(f, {3, 3}));
}

TEST_CASE("occlusion_mask: consistent translation keeps interior pixels") {
  const flow::FlowField fwd(10, 8, {1, 0});
  const flow::FlowField bwd(10, 8, {-1, 0});
  const auto m = flow::occlusion_mask(fwd, bwd);
  for (int v = 0; v < 8; ++v) {
    for (int u = 0; u < 9; ++u) CHECK_FALSE(m(u, v));
    CHECK(m(9, v));  // chained position leaves the image
  }
}

TEST_CASE("occlusion_mask: zero flow is consistent") {
  const flow::FlowField z(5, 5);
  CHECK(flow::occlusion_mask(z, z).count() == 0);
}

TEST_CASE("occlusion_mask: inconsistent magnitude is occluded") {
  const flow::FlowField fwd(30, 3, {10, 0});
  const flow::FlowField bwd(30, 3, {0, 0});
  // |f + b|^2 = 100 >= 0.01 * 100 + 0.5
  CHECK(flow::is_consistent(fwd, bwd, 0, 0) == false);
  CHECK(flow::occlusion_mask(fwd, bwd)(0, 1));
}

TEST_CASE("occlusion_mask: threshold boundary") {
  // f = (0, 0), b = (d, 0): occluded iff d^2 >= 0.01 d^2 + 0.5
  const double d_star = std::sqrt(0.5 / 0.99);
  const flow::FlowField fwd(3, 3);
  CHECK(flow::is_consistent(fwd, flow::FlowField(3, 3, {d_star * 0.999, 0}), 1, 1));
  CHECK_FALSE(flow::is_consistent(fwd, flow::FlowField(3, 3, {d_star * 1.001, 0}), 1, 1));
}

TEST_CASE("occlusion_mask: size mismatch") {
  CHECK_THROWS_AS(flow::occlusion_mask(flow::FlowField(4, 4), flow::FlowField(4, 5)), Error);
}

}
