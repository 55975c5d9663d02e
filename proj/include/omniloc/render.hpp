#pragma once

#include "omniloc/optimizer.hpp"
#include "omniloc/types.hpp"

#include <cstdint>
#include <vector>

namespace omniloc {

struct RenderOutput {
  Panorama image;
  std::vector<std::uint8_t> valid;  // H*W, pixel received at least one splat
  std::vector<double> depth;        // H*W, nearest point distance in meters

  bool valid_at(int r, int c) const {
    return valid[static_cast<std::size_t>(r) * image.width + c] != 0;
  }
  double depth_at(int r, int c) const {
    return depth[static_cast<std::size_t>(r) * image.width + c];
  }
};

/// Z-buffered point-splat rendering of the cloud from a pose. Every point
/// projects onto the panorama and writes its color to all pixels within the
/// Chebyshev splat radius, nearest depth winning per pixel (earlier point
/// wins exact ties). Splats wrap across the azimuth seam; rows outside the
/// image are dropped. Untouched pixels stay black with the valid flag clear
/// and infinite depth.
RenderOutput render(const PointCloud& cloud, const Pose& pose, int height, int width,
                    int splat_radius_px);

/// Mean Euclidean RGB distance between render(cloud, pose) and the image,
/// averaged over pixels the rendering actually covered. kSentinelLoss when
/// nothing is covered.
double photometric_loss(const PointCloud& cloud, const Panorama& image, const Pose& pose,
                        int splat_radius_px);

/// Counterpart of refine() that descends the rendered photometric loss
/// instead. The loss is not analytically differentiable through the splat
/// renderer, so gradients come from central finite differences (two renders
/// per parameter per iteration) at pixel-scale probe steps.
RefinementTrace refine_photometric(const PointCloud& cloud, const Panorama& image,
                                   const Pose& start, int n_iter, double alpha0,
                                   bool gravity_known, int splat_radius_px,
                                   double decay_factor = 0.8, int patience = 5);

enum class TextureMode { kChecker, kNoise, kSemanticFlat };

struct SceneParams {
  std::uint64_t seed = 0;
  Vec3 room_extent = Vec3(4.0, 3.0, 2.5);
  double points_per_m2 = 500.0;
  TextureMode texture = TextureMode::kChecker;
  bool gravity_aligned = true;
  int pano_height = 256;
  int pano_width = 512;
  int splat_radius_px = 1;
  double checker_cell_min = 0.4;  // meters
  double checker_cell_max = 0.8;
  // Spacing of the value-noise lattice. Small steps give busy high-frequency
  // texture; steps past a meter give slow wall-scale color ramps that keep the
  // loss surface smooth far from the optimum.
  double noise_step = 0.5;  // meters
  // Half-range of the per-node scatter around each face's base tone. High
  // detail hides which face is which from a bad pose; low detail keeps every
  // face recognizable at a glance the way painted walls are.
  double noise_detail = 0.13;
  int min_boxes = 2;
  int max_boxes = 5;
  // When set, all four walls share one texture so azimuth is ambiguous for
  // raw loss ranking.
  bool repeated_wall_texture = false;
  // Blends texture colors toward mid gray; large values flatten contrast and
  // create low-loss impostor poses while color statistics stay informative.
  double base_color_weight = 0.0;
};

struct Box {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();
};

struct SceneDescriptor {
  SceneParams params;
  std::vector<Box> boxes;
  double total_area = 0.0;  // sampled surface area in m^2
};

struct SyntheticScene {
  PointCloud cloud;
  Pose oracle_pose;
  Panorama panorama;  // rendered at oracle_pose
  SceneDescriptor descriptor;
};

/// Deterministic synthetic test scene: an axis-aligned room (floor, ceiling,
/// four walls) furnished with a few boxes, point-sampled at the requested
/// density and textured per `texture`. The oracle pose sits in the free
/// interior away from walls and boxes; the stored panorama is the scene
/// rendered from it. Throws if the density asks for more than 5e6 points.
SyntheticScene generate_scene(const SceneParams& params);
SyntheticScene generate_scene(std::uint64_t seed, const Vec3& room_extent,
                              double points_per_m2, TextureMode texture);

struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
};

/// Maps a pose expressed in the original frame into the frame of a cloud
/// transformed by X' = G X + g.
Pose adjust_pose(const Pose& pose, const RigidTransform& transform);

/// Benchmark-protocol augmentation: rotates the cloud about +z by
/// theta ~ U(0, pi) and shifts it by a translation with components ~ U(0, 3)
/// meters. Returns the transformed cloud and the transform itself (feed it to
/// adjust_pose to carry ground truth into the new frame).
std::pair<PointCloud, RigidTransform> augment_pose(const PointCloud& cloud,
                                                   std::uint64_t seed);

}  // namespace omniloc
