#include "fmqm/distortions.hpp"
#include "fmqm/error.hpp"
#include "fmqm/evaluation.hpp"
#include "fmqm/pipeline.hpp"
#include "fmqm/primitives.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace fmqm;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using IndexArray = py::array_t<int, py::array::c_style | py::array::forcecast>;

py::object to_python(const nlohmann::ordered_json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

Array texture_to_array(const TextureImage& tex) {
  Array a({tex.height(), tex.width(), 3});
  auto m = a.mutable_unchecked<3>();
  for (int y = 0; y < tex.height(); ++y)
    for (int x = 0; x < tex.width(); ++x)
      for (int c = 0; c < 3; ++c) m(y, x, c) = tex.at(x, y)[c];
  return a;
}

TextureImage texture_from_array(const Array& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw InvalidArgument("texture must have shape (height, width, 3)");
  const auto m = a.unchecked<3>();
  TextureImage tex(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  for (int y = 0; y < tex.height(); ++y)
    for (int x = 0; x < tex.width(); ++x)
      for (int c = 0; c < 3; ++c) tex.at(x, y)[c] = m(y, x, c);
  return tex;
}

template <int N>
void require_rows(const py::array& a, const char* name) {
  if (a.ndim() != 2 || a.shape(1) != N)
    throw InvalidArgument(std::string(name) + " must have shape (n, " + std::to_string(N) + ")");
}

FmqmConfig make_config(const py::kwargs& kw) {
  FmqmConfig c;
  for (auto [key, value] : kw) {
    const auto k = key.cast<std::string>();
    if (k == "n_target") c.n_target = value.cast<std::size_t>();
    else if (k == "n_patch") c.n_patch = value.cast<std::size_t>();
    else if (k == "sigma_base") c.sigma_base = value.cast<double>();
    else if (k == "nor_thre") c.nor_thre = value.cast<double>();
    else if (k == "tan_thre") c.tan_thre = value.cast<double>();
    else if (k == "radius_factor") c.radius_factor = value.cast<double>();
    else if (k == "n_color_patch") c.n_color_patch = value.cast<std::size_t>();
    else if (k == "seed") c.seed = value.cast<std::uint64_t>();
    else if (k == "grad_all_samples") c.grad_all_samples = value.cast<bool>();
    else if (k == "threads") c.threads = value.cast<unsigned>();
    else if (k == "pooling") {
      const auto s = value.cast<std::string>();
      if (s != "geometric" && s != "arithmetic") throw InvalidArgument("pooling must be geometric or arithmetic");
      c.pooling = s == "geometric" ? PoolingMode::Geometric : PoolingMode::Arithmetic;
    } else if (k == "color_space") {
      const auto s = value.cast<std::string>();
      if (s != "rgb" && s != "lab") throw InvalidArgument("color_space must be rgb or lab");
      c.color_space = s == "rgb" ? ColorSpace::Rgb : ColorSpace::Lab;
    } else if (k == "centers") {
      const auto s = value.cast<std::string>();
      if (s != "fps" && s != "random") throw InvalidArgument("centers must be fps or random");
      c.center_mode = s == "fps" ? CenterMode::Fps : CenterMode::Random;
    } else {
      throw InvalidArgument("unknown option " + k);
    }
  }
  return c;
}

std::vector<double> as_vector(const Array& a) { return {a.data(), a.data() + a.size()}; }

}  // namespace

PYBIND11_MODULE(_fmqm, m) {
  m.doc() = "Field-based quality metric for textured meshes";

  auto base = py::register_exception<Error>(m, "FmqmError", PyExc_RuntimeError);
  py::register_exception<IoError>(m, "FmqmIoError", base.ptr());
  py::register_exception<ParseError>(m, "FmqmParseError", base.ptr());
  py::register_exception<InvalidArgument>(m, "FmqmInvalidArgument", base.ptr());
  py::register_exception<NumericError>(m, "FmqmNumericError", base.ptr());

  py::class_<TexturedMesh>(m, "Mesh")
      .def(py::init([](const Array& vertices, const Array& uvs, const IndexArray& faces, const IndexArray& face_uvs,
                       const Array& texture) {
             require_rows<3>(vertices, "vertices");
             require_rows<2>(uvs, "uvs");
             require_rows<3>(faces, "faces");
             require_rows<3>(face_uvs, "face_uvs");
             if (faces.shape(0) != face_uvs.shape(0)) throw InvalidArgument("faces and face_uvs differ in length");
             TexturedMesh mesh;
             const auto v = vertices.unchecked<2>();
             for (py::ssize_t i = 0; i < v.shape(0); ++i) mesh.vertices.emplace_back(v(i, 0), v(i, 1), v(i, 2));
             const auto t = uvs.unchecked<2>();
             for (py::ssize_t i = 0; i < t.shape(0); ++i) mesh.uvs.emplace_back(t(i, 0), t(i, 1));
             const auto f = faces.unchecked<2>();
             const auto ft = face_uvs.unchecked<2>();
             for (py::ssize_t i = 0; i < f.shape(0); ++i)
               mesh.faces.push_back({{f(i, 0), f(i, 1), f(i, 2)}, {ft(i, 0), ft(i, 1), ft(i, 2)}});
             mesh.texture = texture_from_array(texture);
             mesh.validate();
             return mesh;
           }),
           py::arg("vertices"), py::arg("uvs"), py::arg("faces"), py::arg("face_uvs"), py::arg("texture"))
      .def_property_readonly("vertices",
                             [](const TexturedMesh& mesh) {
                               Array a({static_cast<py::ssize_t>(mesh.vertices.size()), py::ssize_t{3}});
                               auto w = a.mutable_unchecked<2>();
                               for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
                                 for (int c = 0; c < 3; ++c) w(i, c) = mesh.vertices[i][c];
                               return a;
                             })
      .def_property_readonly("uvs",
                             [](const TexturedMesh& mesh) {
                               Array a({static_cast<py::ssize_t>(mesh.uvs.size()), py::ssize_t{2}});
                               auto w = a.mutable_unchecked<2>();
                               for (std::size_t i = 0; i < mesh.uvs.size(); ++i)
                                 for (int c = 0; c < 2; ++c) w(i, c) = mesh.uvs[i][c];
                               return a;
                             })
      .def_property_readonly("faces",
                             [](const TexturedMesh& mesh) {
                               IndexArray a({static_cast<py::ssize_t>(mesh.faces.size()), py::ssize_t{3}});
                               auto w = a.mutable_unchecked<2>();
                               for (std::size_t i = 0; i < mesh.faces.size(); ++i)
                                 for (int c = 0; c < 3; ++c) w(i, c) = mesh.faces[i].v[c];
                               return a;
                             })
      .def_property_readonly("face_uvs",
                             [](const TexturedMesh& mesh) {
                               IndexArray a({static_cast<py::ssize_t>(mesh.faces.size()), py::ssize_t{3}});
                               auto w = a.mutable_unchecked<2>();
                               for (std::size_t i = 0; i < mesh.faces.size(); ++i)
                                 for (int c = 0; c < 3; ++c) w(i, c) = mesh.faces[i].vt[c];
                               return a;
                             })
      .def_property_readonly("texture", [](const TexturedMesh& mesh) { return texture_to_array(mesh.texture); })
      .def("__repr__", [](const TexturedMesh& mesh) {
        return "<Mesh vertices=" + std::to_string(mesh.vertices.size()) +
               " faces=" + std::to_string(mesh.faces.size()) + " texture=" + std::to_string(mesh.texture.width()) +
               "x" + std::to_string(mesh.texture.height()) + ">";
      });

  m.def("load_mesh", &load_mesh, py::arg("path"));
  m.def("save_mesh", &save_mesh, py::arg("mesh"), py::arg("path"));
  m.def("surface_area", [](const TexturedMesh& mesh) { return compute_stats(mesh).total_area; });

  m.def(
      "default_config", [] { return to_python(config_to_json(FmqmConfig{})); },
      "Default options as a dict.");

  m.def(
      "compare",
      [](const TexturedMesh& ref, const TexturedMesh& dist, const py::kwargs& kw) {
        const FmqmConfig cfg = make_config(kw);
        FmqmResult r;
        {
          py::gil_scoped_release release;
          r = compute_fmqm(ref, dist, cfg);
        }
        return to_python(result_to_json(r, cfg));
      },
      py::arg("ref"), py::arg("dist"), "Score `dist` against `ref`; options as keyword arguments.");
  m.def(
      "compare_files",
      [](const std::filesystem::path& ref, const std::filesystem::path& dist, const py::kwargs& kw) {
        const FmqmConfig cfg = make_config(kw);
        FmqmResult r;
        {
          py::gil_scoped_release release;
          r = compute_fmqm(ref, dist, cfg);
        }
        return to_python(result_to_json(r, cfg));
      },
      py::arg("ref"), py::arg("dist"));

  m.def("gaussian_noise", &vertex_gaussian_noise, py::arg("mesh"), py::arg("sigma"), py::arg("seed") = 1);
  m.def("quantize", &quantize_positions, py::arg("mesh"), py::arg("bits"));
  m.def("downsample_texture", &downsample_mesh_texture, py::arg("mesh"), py::arg("factor"));

  auto prim = m.def_submodule("primitives", "Procedural test meshes");
  prim.def("checker", [](int size) { return texture_to_array(primitives::multiscale_checker(size)); },
           py::arg("size") = 256);
  auto texture_or_checker = [](const std::optional<Array>& t) {
    return t ? texture_from_array(*t) : primitives::multiscale_checker(256);
  };
  prim.def("plane", [=](int n, std::optional<Array> t) { return primitives::plane(n, texture_or_checker(t)); },
           py::arg("n") = 16, py::arg("texture") = py::none());
  prim.def("cube", [=](int n, std::optional<Array> t) { return primitives::cube(n, texture_or_checker(t)); },
           py::arg("n") = 8, py::arg("texture") = py::none());
  prim.def("icosphere",
           [=](int level, std::optional<Array> t) { return primitives::icosphere(level, texture_or_checker(t)); },
           py::arg("level") = 3, py::arg("texture") = py::none());
  prim.def("torus",
           [=](int a, int b, std::optional<Array> t) { return primitives::torus(a, b, texture_or_checker(t)); },
           py::arg("n_major") = 32, py::arg("n_minor") = 16, py::arg("texture") = py::none());
  prim.def("vase",
           [=](int a, int b, std::optional<Array> t) { return primitives::checker_vase(a, b, texture_or_checker(t)); },
           py::arg("n_around") = 32, py::arg("n_along") = 24, py::arg("texture") = py::none());

  m.def("pearson", [](const Array& x, const Array& y) { return pearson(as_vector(x), as_vector(y)); });
  m.def("spearman", [](const Array& x, const Array& y) { return spearman(as_vector(x), as_vector(y)); });
  m.def(
      "evaluate",
      [](const Array& objective, const Array& mos) {
        return to_python(report_to_json(evaluate(as_vector(objective), as_vector(mos))));
      },
      py::arg("objective"), py::arg("mos"), "PLCC/SROCC/RMSE after a 4-parameter logistic mapping.");
}
