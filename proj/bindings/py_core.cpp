#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "holograph/commands.hpp"
#include "holograph/errors.hpp"
#include "holograph/graphprep.hpp"
#include "holograph/network.hpp"
#include "holograph/run_config.hpp"
#include "holograph/synth.hpp"
#include "holograph/training.hpp"

namespace py = pybind11;
using namespace holograph;

namespace {

// Row-major nested list views keep the module numpy-free; fields are small
// (n^2 complex) and this is a driving/inspection API, not the hot path.
std::vector<std::vector<cdouble>> field_rows(const ComplexField& f) {
  std::vector<std::vector<cdouble>> rows(f.n);
  for (std::uint32_t r = 0; r < f.n; ++r)
    rows[r].assign(f.a.begin() + std::size_t{r} * f.n, f.a.begin() + std::size_t{r + 1} * f.n);
  return rows;
}

ComplexField field_from_rows(const std::vector<std::vector<cdouble>>& rows) {
  ComplexField f;
  f.n = static_cast<std::uint32_t>(rows.size());
  f.a.reserve(std::size_t{f.n} * f.n);
  for (const auto& row : rows) {
    if (row.size() != rows.size())
      throw std::invalid_argument("field rows must form a square matrix");
    f.a.insert(f.a.end(), row.begin(), row.end());
  }
  return f;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "core optical simulation and training operations";
#ifdef HOLOGRAPH_VERSION
  m.attr("__version__") = HOLOGRAPH_VERSION;
#endif

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const std::filesystem::filesystem_error& e) {
      PyErr_SetString(PyExc_OSError, e.what());
    }
  });

  py::class_<GridSpec>(m, "GridSpec")
      .def(py::init<>())
      .def(py::init([](std::uint32_t n, double pitch, double wavelength) {
             return GridSpec{n, pitch, wavelength};
           }),
           py::arg("n"), py::arg("pitch") = 36e-6, py::arg("wavelength") = 532e-9)
      .def_readwrite("n", &GridSpec::n)
      .def_readwrite("pitch", &GridSpec::pitch)
      .def_readwrite("wavelength", &GridSpec::wavelength);

  py::class_<ComplexField>(m, "ComplexField")
      .def(py::init(&field_from_rows), py::arg("rows"))
      .def_readonly("n", &ComplexField::n)
      .def("rows", &field_rows)
      .def("__len__", [](const ComplexField& f) { return f.a.size(); });

  py::class_<PhaseMask>(m, "PhaseMask")
      .def(py::init<std::uint32_t>(), py::arg("n"))
      .def_readonly("n", &PhaseMask::n)
      .def_readwrite("theta", &PhaseMask::theta);

  py::class_<SkipChannel>(m, "SkipChannel")
      .def(py::init([](std::uint32_t from, std::uint32_t to) {
             return SkipChannel{from, to};
           }),
           py::arg("from_layer"), py::arg("to_layer"))
      .def_readwrite("from_layer", &SkipChannel::from)
      .def_readwrite("to_layer", &SkipChannel::to);

  m.def(
      "propagate",
      [](const ComplexField& f, const GridSpec& grid, double distance, bool pad2x) {
        return propagate(f, grid, distance, pad2x);
      },
      py::arg("field"), py::arg("grid"), py::arg("distance"), py::arg("pad2x") = false,
      "Fresnel transfer-function propagation over `distance` meters");
  m.def("field_energy", &field_energy, py::arg("field"));
  m.def(
      "intensity", [](const ComplexField& f) { return intensity(f); }, py::arg("field"));

  m.def("build_setup", &build_setup, py::arg("setup_id"),
        "named skip layouts: none, 1..6, or explicit '0-4,0-5' lists");

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_readwrite("dataset", &RunConfig::dataset)
      .def_readwrite("out_dir", &RunConfig::out_dir)
      .def_readwrite("seed", &RunConfig::seed)
      .def_readwrite("n", &RunConfig::n)
      .def_readwrite("pitch", &RunConfig::pitch)
      .def_readwrite("wavelength", &RunConfig::wavelength)
      .def_readwrite("layer_distance", &RunConfig::layer_distance)
      .def_readwrite("pad_propagation", &RunConfig::pad_propagation)
      .def_readwrite("d", &RunConfig::d)
      .def_readwrite("k", &RunConfig::k)
      .def_readwrite("alpha", &RunConfig::alpha)
      .def_readwrite("epsilon", &RunConfig::epsilon)
      .def_readwrite("encode_score_on_phase", &RunConfig::encode_score_on_phase)
      .def_readwrite("normalize_per_node", &RunConfig::normalize_per_node)
      .def_readwrite("num_layers", &RunConfig::num_layers)
      .def_readwrite("feature_layers", &RunConfig::feature_layers)
      .def_readwrite("skip_setup", &RunConfig::skip_setup)
      .def_readwrite("detector_side", &RunConfig::detector_side)
      .def_readwrite("test_size", &RunConfig::test_size)
      .def_readwrite("normalize_detector_sums", &RunConfig::normalize_detector_sums)
      .def_property(
          "learning_rate", [](const RunConfig& c) { return c.hyper.learning_rate; },
          [](RunConfig& c, double v) { c.hyper.learning_rate = v; })
      .def_property(
          "epochs", [](const RunConfig& c) { return c.hyper.epochs; },
          [](RunConfig& c, std::uint32_t v) { c.hyper.epochs = v; })
      .def_property(
          "batch_size", [](const RunConfig& c) { return c.hyper.batch_size; },
          [](RunConfig& c, std::uint32_t v) { c.hyper.batch_size = v; });

  m.def("parse_run_config", &parse_run_config, py::arg("path"));
  m.def("parse_run_config_text", &parse_run_config_text, py::arg("text"),
        py::arg("origin") = "<string>");
  m.def("dump_run_config", &dump_run_config, py::arg("config"));

  py::class_<EpochMetrics>(m, "EpochMetrics")
      .def_readonly("epoch", &EpochMetrics::epoch)
      .def_readonly("train_loss", &EpochMetrics::train_loss)
      .def_readonly("train_acc", &EpochMetrics::train_acc)
      .def_readonly("test_acc", &EpochMetrics::test_acc)
      .def("__repr__", [](const EpochMetrics& e) {
        return "EpochMetrics(epoch=" + std::to_string(e.epoch) +
               ", test_acc=" + std::to_string(e.test_acc) + ")";
      });

  py::class_<PrepOutcome>(m, "PrepOutcome")
      .def_readonly("store", &PrepOutcome::store)
      .def_readonly("num_nodes", &PrepOutcome::num_nodes)
      .def_readonly("num_classes", &PrepOutcome::num_classes)
      .def_readonly("train_count", &PrepOutcome::train_count)
      .def_readonly("test_count", &PrepOutcome::test_count);

  py::class_<TrainOutcome>(m, "TrainOutcome")
      .def_readonly("checkpoint", &TrainOutcome::checkpoint)
      .def_readonly("metrics_csv", &TrainOutcome::metrics_csv)
      .def_readonly("final_metrics", &TrainOutcome::final_metrics)
      .def_readonly("history", &TrainOutcome::history);

  py::class_<EvalOutcome>(m, "EvalOutcome")
      .def_readonly("accuracy", &EvalOutcome::accuracy)
      .def_readonly("confusion", &EvalOutcome::confusion)
      .def_readonly("confusion_csv", &EvalOutcome::confusion_csv);

  py::class_<SweepOutcome>(m, "SweepOutcome")
      .def_readonly("csv", &SweepOutcome::csv)
      .def_readonly("variants", &SweepOutcome::variants)
      .def_readonly("test_acc", &SweepOutcome::test_acc)
      .def_readonly("best_acc", &SweepOutcome::best_acc);

  py::class_<GradCheckReport>(m, "GradCheckReport")
      .def_readonly("params_checked", &GradCheckReport::params_checked)
      .def_readonly("max_rel_err", &GradCheckReport::max_rel_err)
      .def_readonly("median_rel_err", &GradCheckReport::median_rel_err)
      .def_readonly("grad_rms", &GradCheckReport::grad_rms)
      .def_readonly("fd_step", &GradCheckReport::fd_step)
      .def_readonly("passed", &GradCheckReport::passed)
      .def_readonly("tolerance", &GradCheckReport::tolerance);

  m.def("prep", &cmd_prep, py::arg("config"), py::call_guard<py::gil_scoped_release>());
  m.def(
      "train",
      [](const RunConfig& cfg, bool deterministic, std::uint32_t threads,
         const std::function<void(const EpochMetrics&)>& progress) {
        RunControls controls;
        controls.deterministic = deterministic;
        controls.threads = threads;
        if (progress)
          controls.progress = [&progress](const EpochMetrics& metrics) {
            py::gil_scoped_acquire gil;
            progress(metrics);
          };
        py::gil_scoped_release release;
        return cmd_train(cfg, controls);
      },
      py::arg("config"), py::arg("deterministic") = false, py::arg("threads") = 0,
      py::arg("progress") = nullptr);
  m.def(
      "evaluate",
      [](const RunConfig& cfg, const std::optional<std::filesystem::path>& checkpoint) {
        py::gil_scoped_release release;
        return cmd_eval(cfg, checkpoint ? *checkpoint : checkpoint_path(cfg));
      },
      py::arg("config"), py::arg("checkpoint") = py::none());
  m.def(
      "explore",
      [](const RunConfig& cfg, const std::vector<std::string>& setups, bool deterministic,
         std::uint32_t threads) {
        RunControls controls;
        controls.deterministic = deterministic;
        controls.threads = threads;
        py::gil_scoped_release release;
        return cmd_explore(cfg, setups, controls);
      },
      py::arg("config"), py::arg("setups"), py::arg("deterministic") = false,
      py::arg("threads") = 0);
  m.def(
      "ablate",
      [](const RunConfig& cfg, const std::string& axis, bool deterministic,
         std::uint32_t threads) {
        RunControls controls;
        controls.deterministic = deterministic;
        controls.threads = threads;
        py::gil_scoped_release release;
        return cmd_ablate(cfg, axis, controls);
      },
      py::arg("config"), py::arg("axis"), py::arg("deterministic") = false,
      py::arg("threads") = 0);
  m.def("gradcheck", &cmd_gradcheck, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("synth", &cmd_synth, py::arg("out_dir"), py::arg("seed") = 1);
}
