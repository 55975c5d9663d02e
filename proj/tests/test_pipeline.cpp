#include "omniloc/geometry.hpp"
#include "omniloc/pipeline.hpp"
#include "omniloc/render.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <utility>
#include <vector>

using namespace omniloc;
using omniloc::testing::localize_room_params;
using omniloc::testing::small_room_params;
using omniloc::testing::within_accuracy;

TEST_CASE("batch quartiles interpolate the order statistics") {
  std::vector<std::pair<Pose, Pose>> pairs;
  const Mat3 eye = Mat3::Identity();
  for (double d : {1.0, 2.0, 3.0, 4.0}) {
    pairs.emplace_back(Pose(eye, Vec3(d, 0.0, 0.0)), Pose(eye, Vec3::Zero()));
  }
  const BatchSummary s = evaluate_batch(pairs);
  CHECK(s.count == 4);
  CHECK(s.t_quartiles[0] == doctest::Approx(1.75));
  CHECK(s.t_quartiles[1] == doctest::Approx(2.5));
  CHECK(s.t_quartiles[2] == doctest::Approx(3.25));
  CHECK(s.r_quartiles[1] == doctest::Approx(0.0));
  CHECK(s.accuracy == doctest::Approx(0.0));
}

TEST_CASE("batch accuracy counts only pairs inside both thresholds") {
  std::vector<std::pair<Pose, Pose>> pairs;
  const Mat3 eye = Mat3::Identity();
  // inside both
  pairs.emplace_back(Pose(eye, Vec3(0.05, 0.0, 0.0)), Pose(eye, Vec3::Zero()));
  // translation out
  pairs.emplace_back(Pose(eye, Vec3(0.2, 0.0, 0.0)), Pose(eye, Vec3::Zero()));
  // rotation out
  pairs.emplace_back(Pose(rot_z(0.2), Vec3::Zero()), Pose(eye, Vec3::Zero()));
  const BatchSummary s = evaluate_batch(pairs);
  CHECK(s.accuracy == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("localize config validation rejects inconsistent settings") {
  LocalizeConfig c = LocalizeConfig::defaults(false);
  CHECK_NOTHROW(c.validate());
  c.k2 = c.k1 + 1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = LocalizeConfig::defaults(false);
  c.k1 = c.n_t * c.n_r + 1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = LocalizeConfig::defaults(false);
  c.n_iter = -1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = LocalizeConfig::defaults(false);
  c.alpha0 = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("gravity-known defaults use the reduced rotation set") {
  const LocalizeConfig unknown = LocalizeConfig::defaults(false);
  const LocalizeConfig known = LocalizeConfig::defaults(true);
  CHECK(unknown.n_r == 32);
  CHECK_FALSE(unknown.gravity_known);
  CHECK(known.n_r == 8);
  CHECK(known.gravity_known);
  CHECK(unknown.n_t == 50);
  CHECK(unknown.k1 == 50);
  CHECK(unknown.k2 == 6);
  CHECK(unknown.n_iter == 100);
}

TEST_CASE("end-to-end localization recovers a known oracle") {
  // Two seeds with the gravity-known fast path keep this suite quick; the
  // wide sweep lives in the acceptance harness.
  for (std::uint64_t s : {1, 2}) {
    const SyntheticScene sc = generate_scene(localize_room_params(s));
    LocalizeConfig cfg = LocalizeConfig::defaults(true);
    cfg.seed = s;
    const LocalizationResult res = localize(sc.cloud, sc.panorama, cfg);
    CHECK_FALSE(res.failed);
    // the translation grid may round below n_t, never above
    CHECK(res.candidate_count > 0);
    CHECK(res.candidate_count <= cfg.n_t * cfg.n_r);
    CHECK(res.candidate_count % cfg.n_r == 0);
    CHECK(static_cast<int>(res.start_poses.size()) == cfg.k2);
    CHECK(res.traces.size() == res.start_poses.size());
    const PoseError e = pose_error(res.best_pose, sc.oracle_pose);
    CHECK(within_accuracy(e));
    // the reported best matches the best trace
    double best = res.traces.front().final_loss;
    for (const auto& tr : res.traces) best = std::min(best, tr.final_loss);
    CHECK(res.best_loss == doctest::Approx(best));
  }
}

TEST_CASE("loss-only candidate selection is available for ablation") {
  const SyntheticScene sc = generate_scene(localize_room_params(3));
  LocalizeConfig cfg = LocalizeConfig::defaults(true);
  cfg.seed = 3;
  cfg.use_histogram_filter = false;
  const LocalizationResult res = localize(sc.cloud, sc.panorama, cfg);
  CHECK_FALSE(res.failed);
  CHECK(static_cast<int>(res.start_poses.size()) == cfg.k2);
}

TEST_CASE("localization reports failure when nothing ever projects") {
  PointMatrix pos = PointMatrix::Zero(5, 3);
  PointMatrix col = PointMatrix::Constant(5, 3, 0.4);
  const PointCloud cloud(pos, col);
  Panorama img(32, 64, 0.4);
  LocalizeConfig cfg = LocalizeConfig::defaults(true);
  cfg.n_t = 4;
  cfg.n_r = 4;
  cfg.k1 = 8;
  cfg.k2 = 2;
  cfg.n_iter = 5;
  const LocalizationResult res = localize(cloud, img, cfg);
  CHECK(res.failed);
  CHECK(std::isinf(res.best_loss));
}

TEST_CASE("the loss surface bottoms out at the oracle cell") {
  int hits = 0;
  const int n_scenes = 10;
  const int res = 8;
  for (std::uint64_t s = 1; s <= n_scenes; ++s) {
    const SyntheticScene sc = generate_scene(small_room_params(s));
    const Eigen::MatrixXd surf = dump_loss_surface(
        sc.cloud, sc.panorama, sc.oracle_pose.translation[2], res, true, 8, s);
    REQUIRE(surf.rows() == res);
    REQUIRE(surf.cols() == res);
    const Vec3 lo = sc.cloud.bbox_min();
    const Vec3 hi = sc.cloud.bbox_max();
    const auto cell = [&](double v, double a, double b) {
      const int c = static_cast<int>((v - a) / (b - a) * res);
      return std::min(std::max(c, 0), res - 1);
    };
    const int cx = cell(sc.oracle_pose.translation[0], lo[0], hi[0]);
    const int cy = cell(sc.oracle_pose.translation[1], lo[1], hi[1]);
    Eigen::Index mr = 0;
    Eigen::Index mc = 0;
    surf.minCoeff(&mr, &mc);
    if (mr == cx && mc == cy) ++hits;
  }
  CHECK(hits >= 8);
}
