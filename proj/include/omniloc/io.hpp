#pragma once

#include "omniloc/pipeline.hpp"
#include "omniloc/render.hpp"
#include "omniloc/types.hpp"

#include <string>

namespace omniloc {

/// Reads an ASCII or binary little-endian PLY with float/double x,y,z and
/// uchar red,green,blue vertex properties (extra properties are skipped).
/// Colors are scaled into [0,1]. Errors carry the offending header line
/// number or vertex index.
PointCloud load_ply(const std::string& path);

/// Writes the cloud as PLY; binary little-endian unless `binary` is false.
/// Colors quantize to 8 bits.
void save_ply(const std::string& path, const PointCloud& cloud, bool binary = true);

/// Reads a PNG into a [0,1] RGB panorama (palette, grayscale, 16-bit and
/// alpha inputs are converted). Warns on stderr when width != 2*height since
/// that is almost always an accidental non-equirectangular input.
Panorama load_png(const std::string& path);

void save_png(const std::string& path, const Panorama& image);

/// Applies `key=value` lines ('#' comments allowed) on top of `base`.
/// Recognized keys match the LocalizeConfig fields: n_t, n_r, n_iter, k1, k2,
/// alpha0, gravity_known, seed, decay_factor, patience, use_histogram_filter.
LocalizeConfig parse_config_text(const std::string& text, LocalizeConfig base);
LocalizeConfig load_config(const std::string& path, LocalizeConfig base);

/// Localization result as JSON: best rotation as unit quaternion (w,x,y,z)
/// and row-major matrix, translation, final loss, per-candidate loss
/// trajectories, timings, and the config echo. `omit_timings` zeroes the
/// timing fields so output files compare byte-identical across runs.
void save_result_json(const std::string& path, const LocalizationResult& result,
                      const LocalizeConfig& config, bool omit_timings = false);

struct ResultFileData {
  Pose pose;
  double final_loss = 0.0;
  bool failed = false;
};

ResultFileData load_result_json(const std::string& path);

void save_oracle_json(const std::string& path, const Pose& pose, const Vec3& bbox_min,
                      const Vec3& bbox_max);

struct OracleFileData {
  Pose pose;
  Vec3 bbox_min = Vec3::Zero();
  Vec3 bbox_max = Vec3::Zero();
};

OracleFileData load_oracle_json(const std::string& path);

void save_descriptor_json(const std::string& path, const SceneDescriptor& descriptor);

void save_summary_json(const std::string& path, const BatchSummary& summary);

}  // namespace omniloc
