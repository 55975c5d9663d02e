#include "omniloc/geometry.hpp"
#include "omniloc/initializer.hpp"
#include "omniloc/io.hpp"
#include "omniloc/optimizer.hpp"
#include "omniloc/parallel.hpp"
#include "omniloc/pipeline.hpp"
#include "omniloc/render.hpp"
#include "omniloc/sampler.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <stdexcept>

namespace py = pybind11;
using namespace omniloc;

namespace {

py::array_t<double> panorama_to_array(const Panorama& image) {
  py::array_t<double> out({image.height, image.width, 3});
  std::memcpy(out.mutable_data(), image.data.data(), image.data.size() * sizeof(double));
  return out;
}

Panorama panorama_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& array) {
  if (array.ndim() != 3 || array.shape(2) != 3) {
    throw std::invalid_argument("expected an (H, W, 3) array");
  }
  Panorama image(static_cast<int>(array.shape(0)), static_cast<int>(array.shape(1)));
  std::memcpy(image.data.data(), array.data(), image.data.size() * sizeof(double));
  return image;
}

py::array_t<std::uint8_t> mask_to_array(const std::vector<std::uint8_t>& mask, int height,
                                        int width) {
  py::array_t<std::uint8_t> out({height, width});
  std::memcpy(out.mutable_data(), mask.data(), mask.size());
  return out;
}

py::array_t<double> grid_to_array(const std::vector<double>& values, int height, int width) {
  py::array_t<double> out({height, width});
  std::memcpy(out.mutable_data(), values.data(), values.size() * sizeof(double));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Point-cloud / 360 panorama localization core";

  py::class_<PointCloud>(m, "PointCloud")
      .def(py::init<>())
      .def(py::init<PointMatrix, PointMatrix>(), py::arg("positions"), py::arg("colors"))
      .def_readwrite("positions", &PointCloud::positions)
      .def_readwrite("colors", &PointCloud::colors)
      .def("count", &PointCloud::count)
      .def("bbox_min", &PointCloud::bbox_min)
      .def("bbox_max", &PointCloud::bbox_max)
      .def("validate", &PointCloud::validate);

  py::class_<Panorama>(m, "Panorama")
      .def(py::init<int, int, double>(), py::arg("height"), py::arg("width"),
           py::arg("fill") = 0.0)
      .def_static("from_array", &panorama_from_array, py::arg("array"))
      .def_readonly("height", &Panorama::height)
      .def_readonly("width", &Panorama::width)
      .def("to_array", &panorama_to_array)
      .def("validate", &Panorama::validate);

  py::class_<Pose>(m, "Pose")
      .def(py::init<>())
      .def(py::init<const Mat3&, const Vec3&>(), py::arg("rotation"), py::arg("translation"))
      .def_readwrite("rotation", &Pose::rotation)
      .def_readwrite("translation", &Pose::translation)
      .def("validate", &Pose::validate);

  py::class_<LocalPoseParam>(m, "LocalPoseParam")
      .def(py::init<>())
      .def(py::init([](const Vec3& omega, const Vec3& tau, const Mat3& base_rotation) {
             LocalPoseParam p;
             p.omega = omega;
             p.tau = tau;
             p.base_rotation = base_rotation;
             return p;
           }),
           py::arg("omega"), py::arg("tau"), py::arg("base_rotation"))
      .def_readwrite("omega", &LocalPoseParam::omega)
      .def_readwrite("tau", &LocalPoseParam::tau)
      .def_readwrite("base_rotation", &LocalPoseParam::base_rotation)
      .def("realized", &LocalPoseParam::realized);

  py::class_<LossGradient>(m, "LossGradient")
      .def_readonly("loss", &LossGradient::loss)
      .def_readonly("d_omega", &LossGradient::d_omega)
      .def_readonly("d_tau", &LossGradient::d_tau)
      .def_readonly("n_valid", &LossGradient::n_valid);

  py::class_<RefinementTrace>(m, "RefinementTrace")
      .def_readonly("loss_history", &RefinementTrace::loss_history)
      .def_readonly("final_loss", &RefinementTrace::final_loss)
      .def("final_pose", &RefinementTrace::final_pose);

  py::class_<LocalizeConfig>(m, "LocalizeConfig")
      .def(py::init<>())
      .def_static("defaults", &LocalizeConfig::defaults, py::arg("gravity_known"))
      .def_readwrite("n_t", &LocalizeConfig::n_t)
      .def_readwrite("n_r", &LocalizeConfig::n_r)
      .def_readwrite("n_iter", &LocalizeConfig::n_iter)
      .def_readwrite("k1", &LocalizeConfig::k1)
      .def_readwrite("k2", &LocalizeConfig::k2)
      .def_readwrite("alpha0", &LocalizeConfig::alpha0)
      .def_readwrite("gravity_known", &LocalizeConfig::gravity_known)
      .def_readwrite("seed", &LocalizeConfig::seed)
      .def_readwrite("decay_factor", &LocalizeConfig::decay_factor)
      .def_readwrite("patience", &LocalizeConfig::patience)
      .def_readwrite("use_histogram_filter", &LocalizeConfig::use_histogram_filter)
      .def("validate", &LocalizeConfig::validate);

  py::class_<LocalizationResult>(m, "LocalizationResult")
      .def_readonly("best_pose", &LocalizationResult::best_pose)
      .def_readonly("best_loss", &LocalizationResult::best_loss)
      .def_readonly("start_poses", &LocalizationResult::start_poses)
      .def_readonly("traces", &LocalizationResult::traces)
      .def_readonly("init_seconds", &LocalizationResult::init_seconds)
      .def_readonly("refine_seconds", &LocalizationResult::refine_seconds)
      .def_readonly("candidate_count", &LocalizationResult::candidate_count)
      .def_readonly("failed", &LocalizationResult::failed);

  py::class_<PoseError>(m, "PoseError")
      .def_readonly("t_error", &PoseError::t_error)
      .def_readonly("r_error_deg", &PoseError::r_error_deg);

  py::class_<BatchSummary>(m, "BatchSummary")
      .def_readonly("t_quartiles", &BatchSummary::t_quartiles)
      .def_readonly("r_quartiles", &BatchSummary::r_quartiles)
      .def_readonly("accuracy", &BatchSummary::accuracy)
      .def_readonly("count", &BatchSummary::count);

  py::enum_<TextureMode>(m, "TextureMode")
      .value("CHECKER", TextureMode::kChecker)
      .value("NOISE", TextureMode::kNoise)
      .value("SEMANTIC_FLAT", TextureMode::kSemanticFlat);

  py::class_<SceneParams>(m, "SceneParams")
      .def(py::init<>())
      .def_readwrite("seed", &SceneParams::seed)
      .def_readwrite("room_extent", &SceneParams::room_extent)
      .def_readwrite("points_per_m2", &SceneParams::points_per_m2)
      .def_readwrite("texture", &SceneParams::texture)
      .def_readwrite("gravity_aligned", &SceneParams::gravity_aligned)
      .def_readwrite("pano_height", &SceneParams::pano_height)
      .def_readwrite("pano_width", &SceneParams::pano_width)
      .def_readwrite("splat_radius_px", &SceneParams::splat_radius_px)
      .def_readwrite("checker_cell_min", &SceneParams::checker_cell_min)
      .def_readwrite("checker_cell_max", &SceneParams::checker_cell_max)
      .def_readwrite("noise_step", &SceneParams::noise_step)
      .def_readwrite("noise_detail", &SceneParams::noise_detail)
      .def_readwrite("min_boxes", &SceneParams::min_boxes)
      .def_readwrite("max_boxes", &SceneParams::max_boxes)
      .def_readwrite("repeated_wall_texture", &SceneParams::repeated_wall_texture)
      .def_readwrite("base_color_weight", &SceneParams::base_color_weight);

  py::class_<Box>(m, "Box")
      .def_readonly("min", &Box::min)
      .def_readonly("max", &Box::max);
  py::class_<SceneDescriptor>(m, "SceneDescriptor")
      .def_readonly("params", &SceneDescriptor::params)
      .def_readonly("boxes", &SceneDescriptor::boxes)
      .def_readonly("total_area", &SceneDescriptor::total_area);
  py::class_<SyntheticScene>(m, "SyntheticScene")
      .def_readonly("cloud", &SyntheticScene::cloud)
      .def_readonly("oracle_pose", &SyntheticScene::oracle_pose)
      .def_readonly("panorama", &SyntheticScene::panorama)
      .def_readonly("descriptor", &SyntheticScene::descriptor);

  py::class_<RigidTransform>(m, "RigidTransform")
      .def_readonly("rotation", &RigidTransform::rotation)
      .def_readonly("translation", &RigidTransform::translation);

  py::class_<RenderOutput>(m, "RenderOutput")
      .def_readonly("image", &RenderOutput::image)
      .def_property_readonly(
          "valid",
          [](const RenderOutput& r) {
            return mask_to_array(r.valid, r.image.height, r.image.width);
          })
      .def_property_readonly("depth", [](const RenderOutput& r) {
        return grid_to_array(r.depth, r.image.height, r.image.width);
      });

  m.def("exp_so3", &exp_so3, py::arg("omega"));
  m.def("so3_right_jacobian", &so3_right_jacobian, py::arg("omega"));
  m.def("rot_z", &rot_z, py::arg("angle"));
  m.def("transform_points", &transform_points, py::arg("points"), py::arg("pose"));
  m.def(
      "project_equirect",
      [](const PointMatrix& points, int height, int width) {
        const ProjectedPoints p = project_equirect(points, height, width);
        return py::make_tuple(CoordMatrix(p.coords), p.valid);
      },
      py::arg("camera_points"), py::arg("height"), py::arg("width"),
      "Returns (coords, valid): (row, col) per point plus validity flags");
  m.def("sample_rotations", &sample_rotations, py::arg("n"), py::arg("gravity_known"),
        py::arg("seed"));
  m.def(
      "sample_translations",
      [](const Vec3& lo, const Vec3& hi, int n) {
        const TranslationGrid g = sample_translations(lo, hi, n);
        return py::make_tuple(g.axis_counts, g.points);
      },
      py::arg("bbox_min"), py::arg("bbox_max"), py::arg("n"),
      "Returns (axis_counts, points)");

  m.def(
      "bilinear_sample",
      [](const Panorama& image, const CoordMatrix& coords, bool with_jacobian) {
        const SampleResult s = bilinear_sample(image, coords, with_jacobian);
        py::object jac = with_jacobian ? py::cast(s.jacobians) : py::object(py::none());
        return py::make_tuple(PointMatrix(s.values), s.valid, std::move(jac));
      },
      py::arg("image"), py::arg("coords"), py::arg("with_jacobian") = false,
      "Returns (values, valid, jacobians-or-None)");
  m.def("sampling_loss", &sampling_loss, py::arg("cloud"), py::arg("image"), py::arg("pose"));
  m.def("sampling_loss_grad", &sampling_loss_grad, py::arg("cloud"), py::arg("image"),
        py::arg("param"));

  m.def("refine", &refine, py::arg("cloud"), py::arg("image"), py::arg("start"),
        py::arg("n_iter"), py::arg("alpha0"), py::arg("gravity_known"),
        py::arg("decay_factor") = 0.8, py::arg("patience") = 5);

  m.def("render", &render, py::arg("cloud"), py::arg("pose"), py::arg("height"),
        py::arg("width"), py::arg("splat_radius_px"));
  m.def("photometric_loss", &photometric_loss, py::arg("cloud"), py::arg("image"),
        py::arg("pose"), py::arg("splat_radius_px"));
  m.def("refine_photometric", &refine_photometric, py::arg("cloud"), py::arg("image"),
        py::arg("start"), py::arg("n_iter"), py::arg("alpha0"), py::arg("gravity_known"),
        py::arg("splat_radius_px"), py::arg("decay_factor") = 0.8, py::arg("patience") = 5);
  m.def("generate_scene", py::overload_cast<const SceneParams&>(&generate_scene),
        py::arg("params"));
  m.def("augment_pose", &augment_pose, py::arg("cloud"), py::arg("seed"));
  m.def("adjust_pose", &adjust_pose, py::arg("pose"), py::arg("transform"));

  py::class_<CandidateSet>(m, "CandidateSet")
      .def(py::init<>())
      .def_readwrite("poses", &CandidateSet::poses)
      .def_readwrite("losses", &CandidateSet::losses)
      .def_readwrite("scores", &CandidateSet::scores);
  m.def("generate_candidates", &generate_candidates, py::arg("cloud"), py::arg("n_t"),
        py::arg("n_r"), py::arg("gravity_known"), py::arg("seed"));
  m.def("filter_by_loss", &filter_by_loss, py::arg("cloud"), py::arg("image"),
        py::arg("candidates"), py::arg("k1"));
  m.def("filter_by_histogram", &filter_by_histogram, py::arg("cloud"), py::arg("image"),
        py::arg("candidates"), py::arg("k2"));

  m.def("localize", &localize, py::arg("cloud"), py::arg("image"), py::arg("config"));
  m.def("pose_error", &pose_error, py::arg("estimate"), py::arg("truth"));
  m.def(
      "evaluate_batch",
      [](const std::vector<std::pair<Pose, Pose>>& pairs) { return evaluate_batch(pairs); },
      py::arg("pairs"));
  m.def("dump_loss_surface", &dump_loss_surface, py::arg("cloud"), py::arg("image"),
        py::arg("z"), py::arg("grid_res"), py::arg("gravity_known"), py::arg("n_r") = 0,
        py::arg("seed") = 0);

  m.def("load_ply", &load_ply, py::arg("path"));
  m.def("save_ply", &save_ply, py::arg("path"), py::arg("cloud"), py::arg("binary") = true);
  m.def("load_png", &load_png, py::arg("path"));
  m.def("save_png", &save_png, py::arg("path"), py::arg("image"));

  m.def("max_threads", &max_threads);
  m.def("set_max_threads", &set_max_threads, py::arg("n"));
}
