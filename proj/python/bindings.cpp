#include <sstream>
#include <tuple>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "rowtracker/cli.hpp"
#include "rowtracker/dataset.hpp"
#include "rowtracker/error.hpp"
#include "rowtracker/eval.hpp"
#include "rowtracker/geom.hpp"
#include "rowtracker/log.hpp"
#include "rowtracker/rowmap.hpp"
#include "rowtracker/track.hpp"

namespace py = pybind11;
namespace rt = rowtracker;

namespace {

// (N, 3) float64 positions and (N, 3) uint8 colours.
py::tuple cloud_arrays(const rt::PointCloud& cloud) {
  const auto n = static_cast<py::ssize_t>(cloud.size());
  py::array_t<double> xyz({n, py::ssize_t{3}});
  py::array_t<std::uint8_t> rgb({n, py::ssize_t{3}});
  auto x = xyz.mutable_unchecked<2>();
  auto c = rgb.mutable_unchecked<2>();
  for (py::ssize_t i = 0; i < n; ++i) {
    const rt::CloudPoint& p = cloud.points[static_cast<std::size_t>(i)];
    for (py::ssize_t k = 0; k < 3; ++k) {
      x(i, k) = p.position(k);
      c(i, k) = p.color[static_cast<std::size_t>(k)];
    }
  }
  return py::make_tuple(xyz, rgb);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Fruit counting by tracking-via-segmentation on rail-mounted RGB-D rows.";

  rt::configure_logging();

  // Messages start with the error code, e.g. "MissingFile: ...".
  py::register_exception<rt::Error>(m, "Error", PyExc_RuntimeError);

  py::enum_<rt::Variant>(m, "Variant")
      .value("bl", rt::Variant::Baseline)
      .value("rp", rt::Variant::Reprojection)
      .value("df", rt::Variant::DepthFiltered);

  py::class_<rt::Intrinsics>(m, "Intrinsics")
      .def(py::init<>())
      .def(py::init([](double fx, double fy, double cx, double cy, int width, int height) {
             return rt::Intrinsics{fx, fy, cx, cy, width, height};
           }),
           py::arg("fx"), py::arg("fy"), py::arg("cx"), py::arg("cy"), py::arg("width"),
           py::arg("height"))
      .def_readwrite("fx", &rt::Intrinsics::fx)
      .def_readwrite("fy", &rt::Intrinsics::fy)
      .def_readwrite("cx", &rt::Intrinsics::cx)
      .def_readwrite("cy", &rt::Intrinsics::cy)
      .def_readwrite("width", &rt::Intrinsics::width)
      .def_readwrite("height", &rt::Intrinsics::height);

  py::class_<rt::Transform>(m, "Transform")
      .def(py::init<>())
      .def(py::init<const Eigen::Matrix3d&, const Eigen::Vector3d&>(), py::arg("rotation"),
           py::arg("translation"))
      .def_static("from_translation", &rt::Transform::from_translation)
      .def_property_readonly("rotation", &rt::Transform::rotation)
      .def_property_readonly("translation", &rt::Transform::translation)
      .def("inverse", &rt::Transform::inverse)
      .def("__matmul__", [](const rt::Transform& a, const rt::Transform& b) { return a * b; });

  m.def("project",
        [](const Eigen::Vector3d& p, const rt::Intrinsics& K) {
          const rt::Pixel px = rt::project(p, K);
          return std::make_tuple(px.u, px.v);
        },
        py::arg("point"), py::arg("intrinsics"),
        "Camera-frame point to pixel (u, v). Raises for non-positive depth.");
  m.def("back_project",
        [](double u, double v, double depth, const rt::Intrinsics& K) {
          return rt::Point3(rt::back_project({u, v}, depth, K));
        },
        py::arg("u"), py::arg("v"), py::arg("depth"), py::arg("intrinsics"));
  m.def("camera_motion", &rt::camera_motion, py::arg("platform_motion"),
        py::arg("camera_extrinsics"));
  m.def("rail_motion", &rt::rail_motion, py::arg("from_distance"), py::arg("to_distance"));

  m.def("normalized_error", &rt::normalized_error, py::arg("gt"), py::arg("pred"));
  m.def("aggregate",
        [](const std::vector<double>& values) {
          const rt::MeanStd s = rt::aggregate(values);
          return std::make_tuple(s.mean, s.std);
        },
        py::arg("values"), "(mean, population std) of per-row errors.");
  m.def("r_squared",
        [](const std::vector<int>& gts, const std::vector<int>& preds) {
          return rt::r_squared(gts, preds);
        },
        py::arg("gts"), py::arg("preds"));

  m.def("count_row",
        [](const std::filesystem::path& data, rt::Variant variant, double iou) {
          const rt::RowDataset row = rt::load_dataset(data);
          rt::TrackerConfig cfg;
          cfg.variant = variant;
          cfg.iou_threshold = iou;
          py::gil_scoped_release release;
          return rt::count_row(row, cfg);
        },
        py::arg("data"), py::arg("variant") = rt::Variant::DepthFiltered, py::arg("iou") = 0.3,
        "Fruit count of one dataset directory.");
  m.def("gt_count",
        [](const std::filesystem::path& data) { return rt::load_dataset(data).gt_count(); },
        py::arg("data"));
  m.def("build_map",
        [](const std::filesystem::path& data, std::size_t skip, double d_min, double d_max) {
          const rt::RowDataset row = rt::load_dataset(data);
          rt::MapConfig cfg;
          cfg.skip = skip;
          cfg.d_min = d_min;
          cfg.d_max = d_max;
          rt::PointCloud cloud;
          {
            py::gil_scoped_release release;
            cloud = rt::build_map(row, cfg);
          }
          return cloud_arrays(cloud);
        },
        py::arg("data"), py::arg("skip") = 60, py::arg("d_min") = 0.2, py::arg("d_max") = 1.4,
        "Row map as (xyz, rgb) arrays.");

  m.def("run",
        [](const std::vector<std::string>& args) {
          std::ostringstream out, err;
          const int status = rt::dispatch(args, out, err);
          return std::make_tuple(status, out.str(), err.str());
        },
        py::arg("args"), "Runs a CLI subcommand in-process: (status, stdout, stderr).");
}
