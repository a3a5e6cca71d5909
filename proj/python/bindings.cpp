// numpy <-> lpr glue. Arrays are copied in and out; nothing aliases.
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lpr/bench.hpp"
#include "lpr/metrics.hpp"
#include "lpr/phantom.hpp"

namespace py = pybind11;
using namespace lpr;

namespace {

using RealArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using ComplexArray = py::array_t<cplx, py::array::c_style | py::array::forcecast>;

template <typename T, typename A>
Plane<T> to_plane(const A& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-D array");
  Plane<T> p(std::size_t(a.shape(0)), std::size_t(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), p.values().begin());
  return p;
}

template <typename T>
py::array_t<T> to_array(const Plane<T>& p) {
  py::array_t<T> a({p.height(), p.width()});
  std::copy(p.values().begin(), p.values().end(), a.mutable_data());
  return a;
}

MeasurementSet to_stack(const std::vector<RealArray>& planes, const Model& m) {
  MeasurementSet I;
  I.modality = modality_of(m);
  for (const auto& a : planes) I.planes.push_back(to_plane<double>(a));
  return I;
}

py::list from_stack(const MeasurementSet& I) {
  py::list out;
  for (const auto& p : I.planes) out.append(to_array(p));
  return out;
}

// std::variant would be unpacked by the stl casters; keep it opaque.
struct ModelHandle {
  Model model;
};

Dims dims_arg(std::pair<std::size_t, std::size_t> d) { return {d.first, d.second}; }

Enhancer enhancer(const std::string& kind, double strength) {
  Enhancer e;
  e.kind = enhancer_kind_from_string(kind);
  e.strength = strength;
  return e;
}

py::dict report(const std::vector<double>& residuals, std::size_t iterations, bool converged, double seconds) {
  py::dict d;
  d["residuals"] = residuals;
  d["iterations"] = iterations;
  d["converged"] = converged;
  d["wall_seconds"] = seconds;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Phase retrieval solvers: AP, plug-and-play LPR, Wirtinger flow.";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);

  py::class_<ModelHandle>(m, "Model")
      .def_property_readonly("modality", [](const ModelHandle& x) { return to_string(modality_of(x.model)); })
      .def_property_readonly("planes", [](const ModelHandle& x) { return expected_planes(x.model); })
      .def_property_readonly("object_shape", [](const ModelHandle& x) {
        const Dims d = object_dims(x.model);
        return py::make_tuple(d.height, d.width);
      });

  m.def("cdp_model", [](std::pair<std::size_t, std::size_t> shape, std::size_t masks, std::uint64_t seed) {
        return ModelHandle{CdpModel::gaussian_phase(dims_arg(shape), masks, seed)};
      }, py::arg("shape"), py::arg("masks"), py::arg("seed") = 0);
  m.def("cdi_model", [](std::pair<std::size_t, std::size_t> shape, double oversample, bool real, bool nonneg) {
        CdiModel c = CdiModel::make(dims_arg(shape), oversample);
        c.enforce_real = real;
        c.enforce_nonnegative = nonneg;
        return ModelHandle{c};
      }, py::arg("shape"), py::arg("oversample") = 2.0, py::arg("real") = false, py::arg("nonnegative") = false);
  m.def("fpm_model", [](std::pair<std::size_t, std::size_t> shape, std::size_t grid, std::size_t downsample) {
        FpmGeometry g;
        g.hr = dims_arg(shape);
        g.grid = grid;
        g.downsample = downsample;
        return ModelHandle{FpmModel::from_geometry(g)};
      }, py::arg("shape"), py::arg("grid") = 7, py::arg("downsample") = 4);

  m.def("fft2", [](const ComplexArray& a) { return to_array(fft2(to_plane<cplx>(a))); });
  m.def("ifft2", [](const ComplexArray& a) { return to_array(ifft2(to_plane<cplx>(a))); });
  m.def("psnr", [](const RealArray& ref, const RealArray& test, std::optional<double> peak) {
        const RealImage r = to_plane<double>(ref);
        return peak ? psnr(r, to_plane<double>(test), *peak) : psnr(r, to_plane<double>(test));
      }, py::arg("ref"), py::arg("test"), py::arg("peak") = py::none());
  m.def("ssim", [](const RealArray& ref, const RealArray& test, double range) {
        return ssim(to_plane<double>(ref), to_plane<double>(test), range);
      }, py::arg("ref"), py::arg("test"), py::arg("data_range") = 1.0);
  m.def("phantom", [](std::pair<std::size_t, std::size_t> shape, std::uint64_t seed, std::string pattern) {
        return to_array(make_pattern(pattern, dims_arg(shape), seed));
      }, py::arg("shape"), py::arg("seed") = 7, py::arg("pattern") = "phantom");

  m.def("forward", [](const ComplexArray& u, const ModelHandle& h) {
        const Model& model = h.model;
        return from_stack(forward(to_plane<cplx>(u), model));
      });
  m.def("add_wgn", [](const std::vector<RealArray>& planes, double snr_db, std::uint64_t seed) {
        MeasurementSet I;
        for (const auto& a : planes) I.planes.push_back(to_plane<double>(a));
        return from_stack(add_wgn(I, {snr_db, seed}));
      }, py::arg("planes"), py::arg("snr_db"), py::arg("seed") = 0);
  m.def("denoise", [](const RealArray& img, const std::string& kind, double strength) {
        return to_array(enhance(to_plane<double>(img), enhancer(kind, strength)));
      }, py::arg("image"), py::arg("kind") = "tv", py::arg("strength") = 0.1);

  m.def("ap_solve", [](const std::vector<RealArray>& planes, const ModelHandle& h, std::size_t max_iters,
                       std::optional<ComplexArray> init) {
        const Model& model = h.model;
        const MeasurementSet I = to_stack(planes, model);
        ApParams p = default_ap_params(modality_of(model));
        p.max_iters = max_iters;
        ApResult r;
        {
          const ComplexField start = init ? to_plane<cplx>(*init) : default_init(I, model);
          py::gil_scoped_release nogil;
          r = ap_solve(I, model, start, p);
        }
        return py::make_tuple(to_array(r.field), report(r.report.residuals, r.report.iterations,
                                                         r.report.converged, r.report.wall_seconds));
      }, py::arg("planes"), py::arg("model"), py::arg("max_iters") = 300, py::arg("init") = py::none());
  m.def("lpr_solve", [](const std::vector<RealArray>& planes, const ModelHandle& h,
                        const std::string& enhancer_kind,
                        std::size_t outer_max, std::optional<std::vector<double>> schedule) {
        const Model& model = h.model;
        const MeasurementSet I = to_stack(planes, model);
        LprParams p = default_lpr_params(modality_of(model));
        p.outer_max = outer_max;
        if (schedule) p.strength_schedule = *schedule;
        LprResult r;
        {
          py::gil_scoped_release nogil;
          r = lpr_solve(I, model, enhancer(enhancer_kind, 0.0), p);
        }
        py::dict rep = report(r.trace.residuals, r.trace.iterations, r.trace.converged, r.trace.wall_seconds);
        rep["strengths"] = r.trace.strengths;
        return py::make_tuple(to_array(r.field), rep);
      }, py::arg("planes"), py::arg("model"), py::arg("enhancer") = "tv", py::arg("outer_max") = 100,
        py::arg("schedule") = py::none());
  m.def("wf_solve", [](const std::vector<RealArray>& planes, const ModelHandle& h, std::size_t max_iters) {
        const Model& model = h.model;
        const MeasurementSet I = to_stack(planes, model);
        WfParams p;
        p.max_iters = max_iters;
        ApResult r;
        {
          py::gil_scoped_release nogil;
          r = wf_baseline(I, model, p);
        }
        return py::make_tuple(to_array(r.field), report(r.report.residuals, r.report.iterations,
                                                         r.report.converged, r.report.wall_seconds));
      }, py::arg("planes"), py::arg("model"), py::arg("max_iters") = 2000);
  m.def("align_phase", [](const ComplexArray& est, const ComplexArray& ref) {
        return to_array(global_phase_align(to_plane<cplx>(est), to_plane<cplx>(ref)).field);
      });

  m.def("run_bench", [](const std::string& config_path, std::optional<std::string> out) {
        ExperimentConfig cfg = load_config(config_path);
        if (out) cfg.output.dir = *out;
        ExperimentResult r;
        {
          py::gil_scoped_release nogil;
          r = run_experiment(cfg);
        }
        return rows_to_csv(r.rows, cfg.output.timing);
      }, py::arg("config"), py::arg("out") = py::none(),
      "Runs a benchmark config and returns the CSV text.");
}
