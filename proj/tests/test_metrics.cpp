#include <doctest.h>

#include <cmath>
#include <limits>

#include "monocheck/error.hpp"
#include "monocheck/metrics.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace monocheck;

TEST_SUITE("metrics") {

TEST_CASE("masked PSNR: identical images are infinite") {
  std::mt19937_64 g(1);
  const auto a = test::random_image(16, 16, g);
  CHECK(std::isinf(metrics::masked_psnr(a, a, Mask(16, 16, true))));
}

TEST_CASE("masked PSNR: uniform error of 0.1 gives 20 dB") {
  metrics::ImageFrame a(8, 8, 0.5), b(8, 8, 0.6);
  Mask m(8, 8, false);
  for (int u = 0; u < 4; ++u) m.set(u, 2, true);
  CHECK(std::abs(metrics::masked_psnr(a, b, m) - 20.0) < 1e-9);
}

TEST_CASE("masked PSNR: full mask equals plain PSNR") {
  std::mt19937_64 g(2);
  for (int i = 0; i < 20; ++i) {
    const auto a = test::random_image(32, 24, g);
    const auto b = test::random_image(32, 24, g);
    CHECK(std::abs(metrics::masked_psnr(a, b, Mask(32, 24, true)) - test::reference_psnr(a, b)) < 1e-12);
  }
}

TEST_CASE("masked PSNR: unmasked pixels are ignored") {
  std::mt19937_64 g(3);
  auto a = test::random_image(10, 10, g);
  auto b = a;
  Mask m(10, 10, true);
  m.set(4, 4, false);
  b.at(4, 4, 0) += 0.7;
  CHECK(std::isinf(metrics::masked_psnr(a, b, m)));
}

TEST_CASE("masked PSNR: empty mask and size mismatch") {
  const metrics::ImageFrame a(4, 4), b(4, 4);
  CHECK_THROWS_AS(metrics::masked_psnr(a, b, Mask(4, 4, false)), Error);
  CHECK_THROWS_AS(metrics::masked_psnr(a, metrics::ImageFrame(4, 5), Mask(4, 4, true)), Error);
}

TEST_CASE("masked SSIM: identical images") {
  std::mt19937_64 g(4);
  const auto a = test::random_image(40, 40, g);
  CHECK(metrics::masked_ssim(a, a, Mask(40, 40, true)) >= 1.0 - 1e-9);
  CHECK(metrics::masked_ssim(a, a, Mask(40, 40, true)) <= 1.0 + 1e-9);
}

TEST_CASE("masked SSIM: full mask equals the reference SSIM") {
  std::mt19937_64 g(5);
  for (int i = 0; i < 5; ++i) {
    const auto a = test::random_image(64, 64, g);
    auto b = a;
    for (auto& v : b.data) v = std::clamp(v + 0.2 * (std::uniform_real_distribution<double>(-1, 1)(g)), 0.0, 1.0);
    CHECK(std::abs(metrics::masked_ssim(a, b, Mask(64, 64, true)) - test::reference_ssim(a, b)) < 1e-6);
  }
}

TEST_CASE("masked SSIM: constant images follow the luminance closed form") {
  const metrics::ImageFrame x(32, 32, 0.2), y(32, 32, 0.4);
  const double c1 = 1e-4;
  const double want = (2 * 0.2 * 0.4 + c1) / (0.04 + 0.16 + c1);
  const double got = metrics::masked_ssim(x, y, Mask(32, 32, true));
  CHECK(std::abs(got - want) < 1e-12);
  CHECK(std::abs(got - 0.8001) < 1e-4);
}

TEST_CASE("masked SSIM: content outside the mask does not leak in") {
  std::mt19937_64 g(6);
  const auto a = test::random_image(40, 40, g);
  auto b = a;
  Mask m(40, 40, false);
  for (int v = 0; v < 40; ++v)
    for (int u = 0; u < 20; ++u) m.set(u, v, true);
  for (int v = 0; v < 40; ++v)
    for (int u = 20; u < 40; ++u)
      for (int c = 0; c < 3; ++c) b.at(u, v, c) = 1.0 - a.at(u, v, c);
  CHECK(std::abs(metrics::masked_ssim(a, b, m) - 1.0) < 1e-9);
}

TEST_CASE("masked SSIM: small images are rejected") {
  const metrics::ImageFrame a(8, 8);
  CHECK_THROWS_AS(metrics::masked_ssim(a, a, Mask(8, 8, true)), Error);
}

TEST_CASE("LPIPS aggregate") {
  const Mask full(8, 8, true);
  std::vector<metrics::DistanceMap> zero = {{8, 8, std::vector<double>(64, 0.0)}};
  CHECK(metrics::masked_lpips_aggregate(zero, full) == 0.0);
  std::vector<metrics::DistanceMap> one = {{8, 8, std::vector<double>(64, 0.3)}};
  CHECK(std::abs(metrics::masked_lpips_aggregate(one, full) - 0.3) < 1e-15);
  std::vector<metrics::DistanceMap> two = {{8, 8, std::vector<double>(64, 0.2)},
                                           {4, 4, std::vector<double>(16, 0.1)}};
  CHECK(std::abs(metrics::masked_lpips_aggregate(two, full) - 0.3) < 1e-15);
  CHECK_THROWS_AS(metrics::masked_lpips_aggregate(two, Mask(8, 8, false)), Error);
  std::vector<metrics::DistanceMap> odd = {{3, 3, std::vector<double>(9, 0.1)}};
  CHECK_THROWS_AS(metrics::masked_lpips_aggregate(odd, full), Error);
}

TEST_CASE("downsample_mask keeps majority blocks") {
  Mask m(4, 2, false);
  m.set(0, 0, true);
  m.set(1, 0, true);
  m.set(0, 1, true);
  m.set(2, 0, true);
  m.set(3, 0, true);
  const auto d = metrics::downsample_mask(m, 2, 1);
  CHECK(d(0, 0));
  CHECK_FALSE(d(1, 0));  // exactly half is not a majority
}

TEST_CASE("PCK-T") {
  metrics::KeypointSet gt{0, 640, 480, {}};
  gt.keypoints = {{0, {100, 100}, true}, {1, {200, 200}, true}};
  CHECK(metrics::pck_transfer(gt, gt, 0.05) == 1.0);

  auto pred = gt;
  pred.keypoints[1].position.x() += 33.0;
  CHECK(metrics::pck_transfer(pred, gt, 0.05) == 0.5);

  pred = gt;
  pred.keypoints[0].position.y() += 31.9;
  pred.keypoints[1].position.x() -= 32.1;
  CHECK(metrics::pck_transfer(pred, gt, 0.05) == 0.5);

  pred.keypoints.clear();
  CHECK(metrics::pck_transfer(pred, gt, 0.05) == 0.0);

  auto hidden = gt;
  for (auto& k : hidden.keypoints) k.visible = false;
  CHECK_THROWS_AS(metrics::pck_transfer(gt, hidden, 0.05), Error);
  CHECK_THROWS_AS(metrics::pck_transfer(gt, gt, 0.0), Error);
}

}
