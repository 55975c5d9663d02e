#include "omniloc/render.hpp"

#include "omniloc/geometry.hpp"
#include "omniloc/random.hpp"
#include "omniloc/sampler.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace omniloc {

namespace {

constexpr double kPi = std::numbers::pi;

inline int wrap_col_px(int c, int width) {
  int m = c % width;
  if (m < 0) m += width;
  return m;
}

}  // namespace

RenderOutput render(const PointCloud& cloud, const Pose& pose, int height, int width,
                    int splat_radius_px) {
  if (height <= 0 || width <= 0) throw std::invalid_argument("render target must be non-empty");
  if (splat_radius_px < 0) throw std::invalid_argument("splat radius must be >= 0");
  pose.validate();

  RenderOutput out;
  out.image = Panorama(height, width, 0.0);
  const std::size_t n_px = static_cast<std::size_t>(height) * width;
  out.valid.assign(n_px, 0);
  out.depth.assign(n_px, std::numeric_limits<double>::infinity());

  const Eigen::Index n = cloud.count();
  const Mat3 r = pose.rotation;
  const Vec3 t = pose.translation;

  // Sequential on purpose: with a strict depth comparison the first point
  // wins ties, which keeps the output independent of any thread schedule.
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec3 y = r * (cloud.positions.row(i).transpose() - t);
    const double rho = std::sqrt(y[0] * y[0] + y[1] * y[1]);
    const double dist = std::sqrt(rho * rho + y[2] * y[2]);
    if (!(dist >= kCenterEpsilon)) continue;
    const double phi = std::atan2(y[2], rho);
    const double theta = std::atan2(y[1], y[0]);
    double row = height * (0.5 - phi / kPi);
    double col = width * (theta + kPi) / (2.0 * kPi);
    if (col >= width) col -= width;
    if (col < 0.0) col += width;
    // Nearest pixel, so splat centers agree with the sampler's convention of
    // pixel values living at integer coordinates.
    const int pr = static_cast<int>(std::lround(row));
    const int pc = static_cast<int>(std::lround(col));

    for (int dr = -splat_radius_px; dr <= splat_radius_px; ++dr) {
      const int rr = pr + dr;
      if (rr < 0 || rr >= height) continue;
      for (int dc = -splat_radius_px; dc <= splat_radius_px; ++dc) {
        const int cc = wrap_col_px(pc + dc, width);
        const std::size_t px = static_cast<std::size_t>(rr) * width + cc;
        if (dist < out.depth[px]) {
          out.depth[px] = dist;
          out.valid[px] = 1;
          out.image.set_pixel(rr, cc, cloud.colors.row(i).transpose());
        }
      }
    }
  }
  return out;
}

double photometric_loss(const PointCloud& cloud, const Panorama& image, const Pose& pose,
                        int splat_radius_px) {
  image.validate();
  const RenderOutput rendered = render(cloud, pose, image.height, image.width, splat_radius_px);
  double sum = 0.0;
  std::size_t count = 0;
  for (int rr = 0; rr < image.height; ++rr) {
    for (int cc = 0; cc < image.width; ++cc) {
      if (!rendered.valid_at(rr, cc)) continue;
      const Vec3 diff = rendered.image.pixel(rr, cc) - image.pixel(rr, cc);
      sum += diff.norm();
      ++count;
    }
  }
  if (count == 0) return kSentinelLoss;
  return sum / static_cast<double>(count);
}

namespace {

// Finite-difference probe steps for the photometric baseline. The rendered
// loss is flat below the pixel scale, so probes span roughly one pixel
// (2*pi/512 rad of azimuth, and its arc length a couple of meters out).
constexpr double kFdRotStep = 0.012;
constexpr double kFdTransStep = 0.02;

}  // namespace

RefinementTrace refine_photometric(const PointCloud& cloud, const Panorama& image,
                                   const Pose& start, int n_iter, double alpha0,
                                   bool gravity_known, int splat_radius_px,
                                   double decay_factor, int patience) {
  if (n_iter < 0) throw std::invalid_argument("iteration count must be non-negative");
  start.validate();

  RefinementTrace trace;
  trace.loss_history.reserve(static_cast<std::size_t>(n_iter) + 1);

  LocalPoseParam param;
  param.base_rotation = start.rotation;
  param.tau = start.translation;

  AdamState adam;
  adam.alpha = alpha0;
  SchedulerState sched;
  sched.decay_factor = decay_factor;
  sched.patience = patience;

  const auto eval = [&](const LocalPoseParam& p) {
    return photometric_loss(cloud, image, p.realized(), splat_radius_px);
  };

  double loss = eval(param);
  trace.loss_history.push_back(loss);
  sched.best_loss = loss;

  // Same best-iterate reporting as refine(): the splatted loss floor is
  // noisy, so the last step can land above the best pose visited.
  LocalPoseParam best_param = param;
  double best_loss = loss;

  bool frozen = !std::isfinite(loss);
  for (int it = 0; it < n_iter; ++it) {
    if (frozen) {
      trace.loss_history.push_back(kSentinelLoss);
      continue;
    }
    Vec6 grad = Vec6::Zero();
    for (int k = 0; k < 6; ++k) {
      if (gravity_known && (k == 0 || k == 1)) continue;
      const double eps = k < 3 ? kFdRotStep : kFdTransStep;
      LocalPoseParam plus = param;
      LocalPoseParam minus = param;
      if (k < 3) {
        plus.omega[k] += eps;
        minus.omega[k] -= eps;
      } else {
        plus.tau[k - 3] += eps;
        minus.tau[k - 3] -= eps;
      }
      const double lp = eval(plus);
      const double lm = eval(minus);
      if (std::isfinite(lp) && std::isfinite(lm)) grad[k] = (lp - lm) / (2.0 * eps);
    }
    const Vec6 step = adam_step(adam, grad);
    param.omega -= step.head<3>();
    param.tau -= step.tail<3>();
    if (gravity_known) {
      param.omega[0] = 0.0;
      param.omega[1] = 0.0;
    }
    loss = eval(param);
    trace.loss_history.push_back(loss);
    if (!std::isfinite(loss)) {
      frozen = true;
      continue;
    }
    if (loss < best_loss) {
      best_loss = loss;
      best_param = param;
    }
    scheduler_update(sched, adam, loss);
  }

  trace.final_param = best_param;
  trace.final_loss = best_loss;
  return trace;
}

namespace {

struct Face {
  Vec3 origin;
  Vec3 u_dir;  // unit
  Vec3 v_dir;  // unit
  double lu = 0.0;
  double lv = 0.0;
};

struct FaceTexture {
  Vec3 color_a = Vec3::Constant(0.5);
  Vec3 color_b = Vec3::Constant(0.5);
  double cell = 0.5;
  int nu = 2;
  int nv = 2;
  std::vector<Vec3> lattice;
};

const Vec3 kSemanticPalette[12] = {
    {0.85, 0.10, 0.10}, {0.10, 0.70, 0.15}, {0.15, 0.20, 0.85}, {0.90, 0.75, 0.10},
    {0.80, 0.15, 0.80}, {0.10, 0.80, 0.80}, {0.95, 0.50, 0.10}, {0.50, 0.30, 0.10},
    {0.55, 0.10, 0.60}, {0.20, 0.45, 0.20}, {0.90, 0.90, 0.85}, {0.30, 0.30, 0.35}};

Vec3 random_color(Rng& rng, double lo, double hi) {
  return Vec3(rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi));
}

// Draws a color at least `min_dist` from every color in `taken`, giving up
// after a bounded number of redraws so degenerate palettes cannot hang.
Vec3 separated_color(Rng& rng, const std::vector<Vec3>& taken, double min_dist, double lo,
                     double hi) {
  Vec3 c = random_color(rng, lo, hi);
  for (int tries = 0; tries < 24; ++tries) {
    bool clear = true;
    for (const Vec3& other : taken) {
      if ((c - other).norm() < min_dist) {
        clear = false;
        break;
      }
    }
    if (clear) break;
    c = random_color(rng, lo, hi);
  }
  return c;
}

FaceTexture make_face_texture(Rng& rng, const SceneParams& params, const Face& face,
                              std::vector<Vec3>& base_palette, bool is_room_face) {
  FaceTexture tex;
  switch (params.texture) {
    case TextureMode::kChecker: {
      tex.color_a = random_color(rng, 0.1, 0.9);
      tex.color_b = random_color(rng, 0.1, 0.9);
      for (int tries = 0; tries < 16 && (tex.color_a - tex.color_b).norm() < 0.45; ++tries) {
        tex.color_b = random_color(rng, 0.1, 0.9);
      }
      tex.cell = rng.uniform(params.checker_cell_min, params.checker_cell_max);
      break;
    }
    case TextureMode::kNoise: {
      tex.nu = std::max(2, static_cast<int>(std::ceil(face.lu / params.noise_step)) + 1);
      tex.nv = std::max(2, static_cast<int>(std::ceil(face.lv / params.noise_step)) + 1);
      tex.lattice.reserve(static_cast<std::size_t>(tex.nu) * tex.nv);
      // Nodes scatter around a per-face base tone. Bases are kept mutually
      // distant (strictly for the six room faces, loosely for furniture) so
      // every face stays recognizable from afar the way painted walls are;
      // the scatter provides the local texture.
      const Vec3 base = separated_color(rng, base_palette, is_room_face ? 0.55 : 0.4, 0.08, 0.92);
      if (is_room_face) base_palette.push_back(base);
      const double detail = params.noise_detail;
      for (int k = 0; k < tex.nu * tex.nv; ++k) {
        const Vec3 node = base + random_color(rng, -detail, detail);
        tex.lattice.push_back(node.cwiseMax(0.02).cwiseMin(0.98));
      }
      break;
    }
    case TextureMode::kSemanticFlat:
      // Colors assigned per surface by the caller.
      break;
  }
  return tex;
}

Vec3 texture_color(const SceneParams& params, const FaceTexture& tex, const Face& face,
                   double u, double v) {
  Vec3 c;
  switch (params.texture) {
    case TextureMode::kChecker: {
      const long ku = static_cast<long>(std::floor(u / tex.cell));
      const long kv = static_cast<long>(std::floor(v / tex.cell));
      c = ((ku + kv) & 1) ? tex.color_b : tex.color_a;
      break;
    }
    case TextureMode::kNoise: {
      const double gu = std::clamp(u / face.lu, 0.0, 1.0) * (tex.nu - 1);
      const double gv = std::clamp(v / face.lv, 0.0, 1.0) * (tex.nv - 1);
      const int iu = std::min(static_cast<int>(gu), tex.nu - 2);
      const int iv = std::min(static_cast<int>(gv), tex.nv - 2);
      const double fu = gu - iu;
      const double fv = gv - iv;
      const Vec3& c00 = tex.lattice[static_cast<std::size_t>(iv) * tex.nu + iu];
      const Vec3& c01 = tex.lattice[static_cast<std::size_t>(iv) * tex.nu + iu + 1];
      const Vec3& c10 = tex.lattice[static_cast<std::size_t>(iv + 1) * tex.nu + iu];
      const Vec3& c11 = tex.lattice[static_cast<std::size_t>(iv + 1) * tex.nu + iu + 1];
      c = (1.0 - fv) * ((1.0 - fu) * c00 + fu * c01) + fv * ((1.0 - fu) * c10 + fu * c11);
      break;
    }
    case TextureMode::kSemanticFlat:
      c = tex.color_a;
      break;
  }
  const double w = params.base_color_weight;
  if (w > 0.0) c = (1.0 - w) * c + w * Vec3::Constant(0.5);
  return c.cwiseMax(0.0).cwiseMin(1.0);
}

}  // namespace

SyntheticScene generate_scene(const SceneParams& params) {
  if ((params.room_extent.array() < 1.0).any()) {
    throw std::invalid_argument("room extents must be at least 1 m");
  }
  if (!(params.points_per_m2 > 0.0)) {
    throw std::invalid_argument("point density must be positive");
  }
  if (params.min_boxes < 0 || params.max_boxes < params.min_boxes) {
    throw std::invalid_argument("invalid box count range");
  }
  if (params.pano_height <= 0 || params.pano_width <= 0) {
    throw std::invalid_argument("panorama dimensions must be positive");
  }
  if (!(params.checker_cell_min > 0.0) || params.checker_cell_max < params.checker_cell_min) {
    throw std::invalid_argument("invalid checker cell range");
  }
  if (!(params.noise_step > 0.0)) {
    throw std::invalid_argument("noise step must be positive");
  }

  Rng rng(params.seed);
  const Vec3 ext = params.room_extent;

  // Furniture boxes on the floor, kept away from the walls.
  const double wall_margin = 0.3;
  const int n_boxes =
      params.min_boxes +
      static_cast<int>(rng.uniform_index(
          static_cast<std::uint64_t>(params.max_boxes - params.min_boxes) + 1));
  std::vector<Box> boxes;
  boxes.reserve(static_cast<std::size_t>(n_boxes));
  for (int b = 0; b < n_boxes; ++b) {
    const double max_foot_x = std::max(0.3, ext[0] - 2.0 * wall_margin);
    const double max_foot_y = std::max(0.3, ext[1] - 2.0 * wall_margin);
    const double w = rng.uniform(0.3, std::min(0.8, max_foot_x));
    const double d = rng.uniform(0.3, std::min(0.8, max_foot_y));
    const double h = rng.uniform(0.4, 1.2);
    const double x_hi = ext[0] - wall_margin - w;
    const double y_hi = ext[1] - wall_margin - d;
    const double x0 = x_hi > wall_margin ? rng.uniform(wall_margin, x_hi) : (ext[0] - w) / 2.0;
    const double y0 = y_hi > wall_margin ? rng.uniform(wall_margin, y_hi) : (ext[1] - d) / 2.0;
    Box box;
    box.min = Vec3(x0, y0, 0.0);
    box.max = Vec3(x0 + w, y0 + d, h);
    boxes.push_back(box);
  }

  // Sampled faces: room first (floor, ceiling, four walls), then for each box
  // its top and four sides. Box bottoms lie inside the floor plane and are
  // never visible, so they are not sampled.
  std::vector<Face> faces;
  const auto add_face = [&faces](const Vec3& origin, const Vec3& u_dir, double lu,
                                 const Vec3& v_dir, double lv) {
    Face f;
    f.origin = origin;
    f.u_dir = u_dir;
    f.v_dir = v_dir;
    f.lu = lu;
    f.lv = lv;
    faces.push_back(f);
  };
  const Vec3 ux = Vec3::UnitX();
  const Vec3 uy = Vec3::UnitY();
  const Vec3 uz = Vec3::UnitZ();
  add_face({0, 0, 0}, ux, ext[0], uy, ext[1]);           // floor
  add_face({0, 0, ext[2]}, ux, ext[0], uy, ext[1]);      // ceiling
  add_face({0, 0, 0}, uy, ext[1], uz, ext[2]);           // wall x = 0
  add_face({ext[0], 0, 0}, uy, ext[1], uz, ext[2]);      // wall x = Lx
  add_face({0, 0, 0}, ux, ext[0], uz, ext[2]);           // wall y = 0
  add_face({0, ext[1], 0}, ux, ext[0], uz, ext[2]);      // wall y = Ly
  // Surface index per face: room faces are their own surfaces, every box is
  // one surface covering its five faces (semantic mode colors per surface).
  std::vector<int> surface_of(faces.size());
  for (std::size_t i = 0; i < faces.size(); ++i) surface_of[i] = static_cast<int>(i);
  for (int b = 0; b < n_boxes; ++b) {
    const Box& box = boxes[static_cast<std::size_t>(b)];
    const Vec3 size = box.max - box.min;
    add_face({box.min[0], box.min[1], box.max[2]}, ux, size[0], uy, size[1]);  // top
    add_face({box.min[0], box.min[1], 0}, uy, size[1], uz, size[2]);           // x = min
    add_face({box.max[0], box.min[1], 0}, uy, size[1], uz, size[2]);           // x = max
    add_face({box.min[0], box.min[1], 0}, ux, size[0], uz, size[2]);           // y = min
    add_face({box.min[0], box.max[1], 0}, ux, size[0], uz, size[2]);           // y = max
    for (int k = 0; k < 5; ++k) surface_of.push_back(6 + b);
  }

  std::vector<FaceTexture> textures;
  textures.reserve(faces.size());
  std::vector<Vec3> base_palette;
  for (std::size_t i = 0; i < faces.size(); ++i) {
    textures.push_back(make_face_texture(rng, params, faces[i], base_palette, i < 6));
  }
  if (params.texture == TextureMode::kSemanticFlat) {
    for (std::size_t i = 0; i < faces.size(); ++i) {
      textures[i].color_a = kSemanticPalette[surface_of[i] % 12];
    }
  }
  if (params.repeated_wall_texture) {
    for (std::size_t i = 3; i <= 5; ++i) textures[i] = textures[2];
  }

  // Oracle pose: rejection-sampled in the central free space, clear of the
  // (inflated) furniture.
  const double box_clearance = 0.3;
  Vec3 position = Vec3::Zero();
  bool placed = false;
  for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
    position = Vec3(rng.uniform(0.25 * ext[0], 0.75 * ext[0]),
                    rng.uniform(0.25 * ext[1], 0.75 * ext[1]),
                    rng.uniform(0.40 * ext[2], 0.70 * ext[2]));
    placed = true;
    for (const Box& box : boxes) {
      if ((position.array() > (box.min.array() - box_clearance)).all() &&
          (position.array() < (box.max.array() + box_clearance)).all()) {
        placed = false;
        break;
      }
    }
  }
  if (!placed) throw std::runtime_error("could not place a camera clear of the furniture");

  Mat3 rotation;
  if (params.gravity_aligned) {
    rotation = rot_z(rng.uniform(0.0, 2.0 * kPi));
  } else {
    const double yaw = rng.uniform(0.0, 2.0 * kPi);
    const double pitch = rng.uniform(-0.3, 0.3);
    const double roll = rng.uniform(-0.3, 0.3);
    rotation = (Eigen::AngleAxisd(yaw, uz) * Eigen::AngleAxisd(pitch, uy) *
                Eigen::AngleAxisd(roll, ux))
                   .toRotationMatrix();
  }
  const Pose oracle(rotation, position);

  std::vector<long> counts(faces.size());
  double total_area = 0.0;
  long total_points = 0;
  for (std::size_t i = 0; i < faces.size(); ++i) {
    const double area = faces[i].lu * faces[i].lv;
    total_area += area;
    counts[i] = std::max(1L, std::lround(area * params.points_per_m2));
    total_points += counts[i];
  }
  if (total_points > 5'000'000L) {
    throw std::invalid_argument("scene would exceed 5e6 points; lower the density");
  }

  PointMatrix positions(total_points, 3);
  PointMatrix colors(total_points, 3);
  long row = 0;
  for (std::size_t i = 0; i < faces.size(); ++i) {
    const Face& face = faces[i];
    for (long k = 0; k < counts[i]; ++k) {
      const double u = rng.uniform(0.0, face.lu);
      const double v = rng.uniform(0.0, face.lv);
      positions.row(row) = (face.origin + u * face.u_dir + v * face.v_dir).transpose();
      colors.row(row) = texture_color(params, textures[i], face, u, v).transpose();
      ++row;
    }
  }

  SyntheticScene scene;
  scene.cloud = PointCloud(std::move(positions), std::move(colors));
  scene.cloud.validate();
  scene.oracle_pose = oracle;
  scene.panorama =
      render(scene.cloud, oracle, params.pano_height, params.pano_width, params.splat_radius_px)
          .image;
  scene.descriptor.params = params;
  scene.descriptor.boxes = std::move(boxes);
  scene.descriptor.total_area = total_area;
  return scene;
}

SyntheticScene generate_scene(std::uint64_t seed, const Vec3& room_extent, double points_per_m2,
                              TextureMode texture) {
  SceneParams params;
  params.seed = seed;
  params.room_extent = room_extent;
  params.points_per_m2 = points_per_m2;
  params.texture = texture;
  return generate_scene(params);
}

Pose adjust_pose(const Pose& pose, const RigidTransform& transform) {
  return Pose(pose.rotation * transform.rotation.transpose(),
              transform.rotation * pose.translation + transform.translation);
}

std::pair<PointCloud, RigidTransform> augment_pose(const PointCloud& cloud, std::uint64_t seed) {
  Rng rng(seed);
  RigidTransform g;
  g.rotation = rot_z(rng.uniform(0.0, kPi));
  g.translation = Vec3(rng.uniform(0.0, 3.0), rng.uniform(0.0, 3.0), rng.uniform(0.0, 3.0));

  PointCloud out;
  out.positions = cloud.positions * g.rotation.transpose();
  out.positions.rowwise() += g.translation.transpose();
  out.colors = cloud.colors;
  return {std::move(out), g};
}

}  // namespace omniloc
