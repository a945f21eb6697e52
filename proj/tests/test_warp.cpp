#include <doctest.h>

#include <cmath>

#include <Eigen/Geometry>

#include "monocheck/error.hpp"
#include "monocheck/warp.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace monocheck;
using monocheck::test::identity_camera;
using monocheck::test::uniform;

TEST_SUITE("warp") {

TEST_CASE("volume weights: vacuum, opaque limit and two samples") {
  warp::RaySamples s;
  s.positions = {{0, 0, 1}, {0, 0, 2}};
  s.sigmas = {0.0, 0.0};
  s.deltas = {1.0, 1.0};
  for (double w : warp::volume_weights(s)) CHECK(w == 0.0);

  s.positions = {{0, 0, 1}};
  s.sigmas = {20.0};
  s.deltas = {1.0};
  CHECK(std::abs(warp::volume_weights(s)[0] - (1.0 - std::exp(-20.0))) < 1e-15);

  s.positions = {{0, 0, 1}, {0, 0, 2}};
  s.sigmas = {0.5, 0.5};
  s.deltas = {1.0, 1.0};
  const auto w = warp::volume_weights(s);
  CHECK(std::abs(w[0] - 0.39347) < 1e-5);
  CHECK(std::abs(w[1] - 0.23865) < 1e-5);
  CHECK(std::abs(w[1] - std::exp(-0.5) * (1 - std::exp(-0.5))) < 1e-15);
}

TEST_CASE("volume weights: match transmittance products and telescope") {
  for (int i = 0; i < 1000; ++i) {
    warp::RaySamples s;
    const int n = 1 + static_cast<int>(uniform(0, 64));
    double total = 0.0;
    for (int k = 0; k < n; ++k) {
      s.positions.push_back({0, 0, 1.0 + k});
      s.sigmas.push_back(uniform(0, 5));
      s.deltas.push_back(uniform(1e-3, 0.5));
      total += s.sigmas.back() * s.deltas.back();
    }
    const auto w = warp::volume_weights(s);
    const auto ref = test::reference_weights(s.sigmas, s.deltas);
    double sum = 0.0;
    for (int k = 0; k < n; ++k) {
      CHECK(std::abs(w[k] - ref[k]) < 1e-12);
      sum += w[k];
    }
    CHECK(std::abs(sum - (1.0 - std::exp(-total))) < 1e-12);
  }
}

TEST_CASE("volume weights: validation") {
  warp::RaySamples s;
  s.positions = {{0, 0, 1}};
  s.sigmas = {-1.0};
  s.deltas = {1.0};
  CHECK_THROWS_AS(warp::volume_weights(s), Error);
  s.sigmas = {1.0};
  s.deltas = {0.0};
  CHECK_THROWS_AS(warp::volume_weights(s), Error);
  s.deltas = {1.0, 1.0};
  CHECK_THROWS_AS(warp::volume_weights(s), Error);
}

TEST_CASE("warp_integrate_project: opaque sample") {
  const auto cam = identity_camera();
  warp::RaySamples s;
  s.positions = {{0.05, -0.02, 1.5}};
  s.sigmas = {50.0};
  s.deltas = {1.0};
  const auto p = warp::warp_integrate_project(s, warp::WarpField::identity(), 0, 1, cam);
  CHECK((p - geom::project(cam, s.positions[0])).norm() < 1e-12);

  s.positions = {{0, 0, 1}};
  const auto shift = warp::WarpField::analytic([](const Eigen::Vector3d& x) {
    return Eigen::Vector3d(x + Eigen::Vector3d(0.1, 0, 0));
  });
  const auto q = warp::warp_integrate_project(s, shift, 0, 1, cam);
  CHECK((q - Eigen::Vector2d(60, 50)).norm() < 1e-12);
}

TEST_CASE("warp_integrate_project: equal weights average positions") {
  warp::RaySamples s;
  s.positions = {{-0.1, 0, 1}, {0.1, 0, 1}};
  s.sigmas = {std::log(2.0), 50.0};  // weights 0.5 and 0.5 (1 - e^-50)
  s.deltas = {1.0, 1.0};
  const auto p = warp::warp_integrate_project(s, warp::WarpField::identity(), 0, 1, identity_camera());
  CHECK((p - Eigen::Vector2d(50, 50)).norm() < 1e-12);
}

TEST_CASE("warp_integrate_project: vacuum ray") {
  warp::RaySamples s;
  s.positions = {{0, 0, 1}};
  s.sigmas = {0.0};
  s.deltas = {1.0};
  try {
    warp::warp_integrate_project(s, warp::WarpField::identity(), 0, 1, identity_camera());
    FAIL("expected vacuum ray");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kVacuumRay);
  }
}

TEST_CASE("warp_integrate_project: target density needs an evaluator") {
  warp::RaySamples s;
  s.positions = {{0, 0, 1}};
  s.sigmas = {5.0};
  s.deltas = {1.0};
  warp::IntegrateOptions opt;
  opt.density_source = warp::DensitySource::kTarget;
  CHECK_THROWS_AS(warp::warp_integrate_project(s, warp::WarpField::identity(), 0, 1, identity_camera(), opt), Error);
  opt.target_density = [](const Eigen::Vector3d&) { return 5.0; };
  CHECK_NOTHROW(warp::warp_integrate_project(s, warp::WarpField::identity(), 0, 1, identity_camera(), opt));
}

TEST_CASE("Broyden: identity converges in one step") {
  const Eigen::Vector3d target(0.3, -0.2, 1.7);
  const auto r = warp::broyden_invert_warp([](const Eigen::Vector3d& x) { return x; }, target,
                                           Eigen::Vector3d(1, 1, 1));
  CHECK(r.iterations == 1);
  CHECK((r.x - target).norm() < 1e-15);
}

TEST_CASE("Broyden: diagonal affine warp") {
  const Eigen::Matrix3d a = Eigen::Vector3d(1.2, 0.9, 1.1).asDiagonal();
  const Eigen::Vector3d b(0.1, 0, -0.2);
  const Eigen::Vector3d y(0.5, -1.0, 2.0);
  const auto r = warp::broyden_invert_warp([&](const Eigen::Vector3d& x) { return Eigen::Vector3d(a * x + b); }, y);
  CHECK((r.x - a.inverse() * (y - b)).norm() < 1e-6);
  CHECK(r.iterations <= 50);
}

TEST_CASE("Broyden: sine perturbation matches a fixed-point oracle") {
  const auto w = [](const Eigen::Vector3d& x) {
    return Eigen::Vector3d(x + 0.01 * x.array().sin().matrix());
  };
  for (int i = 0; i < 50; ++i) {
    const Eigen::Vector3d y = test::random_vec(-3, 3);
    // x = y - 0.01 sin(x) is a contraction with constant 0.01.
    Eigen::Vector3d x = y;
    for (int k = 0; k < 60; ++k) x = y - 0.01 * x.array().sin().matrix();
    const auto r = warp::broyden_invert_warp(w, y);
    CHECK((r.x - x).norm() < 1e-6);
  }
}

TEST_CASE("Broyden: non-convergence is reported") {
  // No real solution: |x|^2 + 1 can never equal 0 in the first component.
  const auto w = [](const Eigen::Vector3d& x) {
    return Eigen::Vector3d(x.squaredNorm() + 1.0, x.y(), x.z());
  };
  try {
    warp::broyden_invert_warp(w, Eigen::Vector3d::Zero(), std::nullopt, {1e-6, 20, 10});
    FAIL("expected non-convergence");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNonConvergence);
  }
}

TEST_CASE("chain_scene_flow: identity span, translation and rotation") {
  const Eigen::Vector3d v(0.1, -0.2, 0.05);
  std::vector<warp::StepFlow> shift(7, [&](const Eigen::Vector3d& x) -> std::optional<Eigen::Vector3d> {
    return x + v;
  });
  const Eigen::Vector3d x0(1, 2, 3);
  CHECK(warp::chain_scene_flow(shift, x0, 3, 3) == x0);
  CHECK((warp::chain_scene_flow(shift, x0, 0, 7) - (x0 + 7 * v)).norm() < 1e-12);

  const double theta = 0.13;
  const Eigen::Matrix3d r = Eigen::AngleAxisd(theta, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  std::vector<warp::StepFlow> rot(10, [&](const Eigen::Vector3d& x) -> std::optional<Eigen::Vector3d> {
    return r * x;
  });
  for (int k = 0; k <= 10; ++k) {
    const Eigen::Matrix3d rk = Eigen::AngleAxisd(k * theta, Eigen::Vector3d::UnitZ()).toRotationMatrix();
    CHECK((warp::chain_scene_flow(rot, x0, 0, k) - rk * x0).norm() < 1e-9);
  }
  CHECK_THROWS_AS(warp::chain_scene_flow(rot, x0, 5, 2), Error);
  CHECK_THROWS_AS(warp::chain_scene_flow(rot, x0, 0, 11), Error);
}

TEST_CASE("chain_scene_flow: leaving a grid's domain names the step") {
  std::vector<Eigen::Vector3d> disp(8, Eigen::Vector3d(0.6, 0, 0));
  const warp::GridFlow grid({0, 0, 0}, {1, 1, 1}, {2, 2, 2}, disp);
  std::vector<warp::StepFlow> flows(3, [&](const Eigen::Vector3d& x) { return grid(x); });
  try {
    warp::chain_scene_flow(flows, Eigen::Vector3d(0.1, 0.5, 0.5), 0, 3);
    FAIL("expected out of domain");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kOutOfDomain);
    CHECK(std::string(e.what()).find("2->3") != std::string::npos);
  }
}

TEST_CASE("GridFlow: trilinear interpolation reproduces affine displacement") {
  const Eigen::Vector3i dims(4, 3, 5);
  const Eigen::Vector3d origin(-1, 0, 2), spacing(0.5, 0.25, 1.0);
  const Eigen::Matrix3d m = Eigen::Matrix3d::Random() * 0.1;
  std::vector<Eigen::Vector3d> disp;
  for (int k = 0; k < dims.z(); ++k)
    for (int j = 0; j < dims.y(); ++j)
      for (int i = 0; i < dims.x(); ++i)
        disp.push_back(m * (origin + Eigen::Vector3d(i, j, k).cwiseProduct(spacing)));
  const warp::GridFlow grid(origin, spacing, dims, disp);
  for (int t = 0; t < 200; ++t) {
    const Eigen::Vector3d x = origin + Eigen::Vector3d(uniform(0, 1.5), uniform(0, 0.5), uniform(0, 4));
    const auto y = grid(x);
    REQUIRE(y.has_value());
    CHECK((*y - (x + m * x)).norm() < 1e-12);
  }
  CHECK_FALSE(grid(origin - Eigen::Vector3d(0.01, 0, 0)).has_value());
  CHECK_THROWS_AS(warp::GridFlow(origin, spacing, {1, 3, 5}, disp), Error);
}

}
