#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "plantar/grid_search.hpp"
#include "plantar/io.hpp"
#include "plantar/pipeline.hpp"
#include "plantar/regress.hpp"
#include "plantar/resample.hpp"
#include "plantar/stats.hpp"
#include "plantar/synth.hpp"

namespace py = pybind11;
using namespace plantar;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array pressure_array(const TrialDataset& t) {
  Array out({t.size(), kPixelCount});
  auto a = out.mutable_unchecked<2>();
  for (std::size_t k = 0; k < t.size(); ++k) {
    for (std::size_t i = 0; i < kPixelCount; ++i) a(k, i) = t.frames[k].values[i];
  }
  return out;
}

Array angle_array(const TrialDataset& t) {
  Array out({t.angles.size(), kChannelCount});
  auto a = out.mutable_unchecked<2>();
  for (std::size_t k = 0; k < t.angles.size(); ++k) {
    for (std::size_t c = 0; c < kChannelCount; ++c) a(k, c) = t.angles[k].deg[c];
  }
  return out;
}

TrialDataset make_trial(const Array& pressure, const Array& angles, std::int64_t period_ms,
                        Condition condition, std::string participant, std::string trial_id) {
  if (pressure.ndim() != 2 || pressure.shape(1) != static_cast<py::ssize_t>(kPixelCount)) {
    throw Error(Errc::DimensionMismatch, "pressure must have shape (n, 2304)");
  }
  if (angles.ndim() != 2 || angles.shape(1) != static_cast<py::ssize_t>(kChannelCount)) {
    throw Error(Errc::DimensionMismatch, "angles must have shape (n, 4)");
  }
  const auto p = pressure.unchecked<2>();
  const auto a = angles.unchecked<2>();
  TrialDataset t;
  t.period_ms = period_ms;
  t.condition = condition;
  t.participant_id = std::move(participant);
  t.trial_id = std::move(trial_id);
  t.frames.resize(static_cast<std::size_t>(p.shape(0)));
  t.angles.resize(static_cast<std::size_t>(a.shape(0)));
  for (py::ssize_t k = 0; k < p.shape(0); ++k) {
    auto& f = t.frames[static_cast<std::size_t>(k)];
    f.t_ms = k * period_ms;
    for (py::ssize_t i = 0; i < p.shape(1); ++i) f.values[static_cast<std::size_t>(i)] = p(k, i);
  }
  for (py::ssize_t k = 0; k < a.shape(0); ++k) {
    auto& s = t.angles[static_cast<std::size_t>(k)];
    s.t_ms = k * period_ms;
    for (py::ssize_t c = 0; c < a.shape(1); ++c) s.deg[static_cast<std::size_t>(c)] = a(k, c);
  }
  return validate_trial(std::move(t));
}

std::vector<double> to_vector(const Array& x) {
  if (x.ndim() != 1) throw Error(Errc::DimensionMismatch, "expected a 1-D array");
  return {x.data(), x.data() + x.size()};
}

py::dict report_dict(const EvalReport& r) {
  py::dict d;
  d["trial_id"] = r.trial_id;
  d["participant_id"] = r.participant_id;
  d["channel"] = r.channel;
  d["condition"] = r.condition;
  d["rmse_deg"] = r.rmse_deg;
  d["r2"] = r.r2;
  d["n_validation"] = r.n_validation;
  return d;
}

EvalReport report_from(const py::handle& h) {
  const auto d = h.cast<py::dict>();
  EvalReport r;
  r.channel = d["channel"].cast<AngleChannel>();
  r.condition = d["condition"].cast<Condition>();
  r.rmse_deg = d["rmse_deg"].cast<double>();
  r.r2 = d["r2"].cast<double>();
  if (d.contains("trial_id")) r.trial_id = d["trial_id"].cast<std::string>();
  return r;
}

}  // namespace

PYBIND11_MODULE(_plantar, m) {
  m.doc() = "Joint-angle estimation from plantar pressure distributions";

  // The module attribute keeps the type alive for the interpreter's lifetime.
  static PyObject* error_type = py::exception<Error>(m, "PlantarError").ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::handle(error_type)(std::string(to_string(e.code())) + ": " + e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error_type, exc.ptr());
    }
  });

  py::enum_<Condition>(m, "Condition")
      .value("A_nothing", Condition::A_nothing)
      .value("B_rubber", Condition::B_rubber)
      .value("C_plastic", Condition::C_plastic);
  py::enum_<AngleChannel>(m, "AngleChannel")
      .value("ankle", AngleChannel::ankle)
      .value("knee", AngleChannel::knee)
      .value("hip", AngleChannel::hip)
      .value("upper", AngleChannel::upper);
  m.attr("GRID_SIDE") = kGridSide;
  m.attr("PIXEL_COUNT") = kPixelCount;

  py::class_<PipelineConfig>(m, "PipelineConfig")
      .def(py::init<>())
      .def_readwrite("lambda_", &PipelineConfig::lambda)
      .def_readwrite("threshold", &PipelineConfig::threshold)
      .def_readwrite("warmup_s", &PipelineConfig::warmup_s)
      .def_readwrite("split_train", &PipelineConfig::split_train)
      .def_readwrite("split_validation", &PipelineConfig::split_validation);

  py::class_<TrialDataset>(m, "Trial")
      .def(py::init(&make_trial), py::arg("pressure"), py::arg("angles"), py::arg("period_ms") = 20,
           py::arg("condition") = Condition::A_nothing, py::arg("participant_id") = "",
           py::arg("trial_id") = "")
      .def_property_readonly("pressure", &pressure_array, "(n, 2304) copy, row-major cells")
      .def_property_readonly("angles", &angle_array, "(n, 4) copy in degrees")
      .def_property_readonly("t_ms", [](const TrialDataset& t) {
        std::vector<std::int64_t> out;
        for (const auto& f : t.frames) out.push_back(f.t_ms);
        return out;
      })
      .def_readonly("period_ms", &TrialDataset::period_ms)
      .def_readonly("condition", &TrialDataset::condition)
      .def_readonly("participant_id", &TrialDataset::participant_id)
      .def_readonly("trial_id", &TrialDataset::trial_id)
      .def("__len__", &TrialDataset::size);

  py::class_<RidgeModel>(m, "RidgeModel")
      .def_readonly("channel", &RidgeModel::channel)
      .def_readonly("lambda_", &RidgeModel::lambda)
      .def_property_readonly("selection", [](const RidgeModel& r) { return r.selection.indices; })
      .def_property_readonly("threshold", [](const RidgeModel& r) { return r.selection.threshold; })
      .def_readonly("weights", &RidgeModel::weights)
      .def("predict", [](const RidgeModel& r, const TrialDataset& t) { return predict(r, t.frames); });

  m.def("ridge_fit",
        [](const Eigen::MatrixXd& P, const Array& theta, double lambda) {
          return ridge_fit(P, to_vector(theta), lambda);
        },
        py::arg("P"), py::arg("theta"), py::arg("lambda_"),
        "Weights minimizing |theta - P^T w|^2 + lambda |w|^2; P is pixels x steps.");
  m.def("pearson_r", [](const Array& x, const Array& y) { return pearson_r(to_vector(x), to_vector(y)); });
  m.def("rmse", [](const Array& a, const Array& b) { return rmse(to_vector(a), to_vector(b)); });
  m.def("r_squared", [](const Array& a, const Array& b) { return r_squared(to_vector(a), to_vector(b)); });

  m.def("train_eval_trial",
        [](const TrialDataset& trial, const PipelineConfig& config) {
          const TrialFit fit = train_eval_trial(trial, config);
          py::dict out;
          out["selection"] = fit.selection.indices;
          py::list channels;
          for (const auto& ch : fit.channels) {
            py::dict d;
            d["channel"] = ch.channel;
            d["model"] = ch.model ? py::cast(*ch.model) : py::none();
            d["report"] = ch.report ? py::object(report_dict(*ch.report)) : py::none();
            d["error"] = ch.error ? py::cast(std::string(to_string(*ch.error))) : py::none();
            channels.append(d);
          }
          out["channels"] = channels;
          return out;
        },
        py::arg("trial"), py::arg("config") = PipelineConfig{});

  m.def("grid_search_threshold",
        [](const std::vector<TrialDataset>& trials, const std::vector<double>& candidates,
           const PipelineConfig& config) {
          const auto r = grid_search_threshold(trials, candidates, config);
          std::vector<std::pair<double, std::optional<double>>> scores;
          for (const auto& s : r.scores) scores.emplace_back(s.threshold, s.mean_r2);
          return py::make_tuple(r.chosen, scores);
        },
        py::arg("trials"), py::arg("candidates"), py::arg("config") = PipelineConfig{});

  m.def("generate_trial",
        [](std::uint64_t seed, Condition condition, std::uint64_t foot_seed, double duration_s) {
          synth::SquatConfig squat;
          squat.duration_s = duration_s;
          return synth::generate_trial(seed, condition, squat, synth::make_foot_model(foot_seed));
        },
        py::arg("seed"), py::arg("condition") = Condition::A_nothing, py::arg("foot_seed") = 0,
        py::arg("duration_s") = 30.0, "One synthetic squat trial with the default forward model.");

  m.def("load_trial",
        [](const std::filesystem::path& pressure, const std::filesystem::path& angles,
           Condition condition, std::int64_t period_ms, bool resample) {
          return io::load_trial({pressure, angles, condition, "", pressure.stem().string(), period_ms, resample});
        },
        py::arg("pressure"), py::arg("angles"), py::arg("condition") = Condition::A_nothing,
        py::arg("period_ms") = 20, py::arg("resample") = false);
  m.def("save_trial", &io::save_trial, py::arg("trial"), py::arg("pressure"), py::arg("angles"));
  m.def("save_model", &io::save_model, py::arg("model"), py::arg("path"));
  m.def("load_model", &io::load_model, py::arg("path"));
  m.def("weight_map", [](const RidgeModel& model) {
    const auto map = io::weight_map(model);
    Array out({kGridSide, kGridSide});
    std::copy(map.values.begin(), map.values.end(), out.mutable_data());
    return out;
  });
  m.def("export_weight_map", [](const RidgeModel& model, const std::filesystem::path& prefix) {
    io::export_weight_map(model, prefix);
  });

  auto st = m.def_submodule("stats", "Hypothesis tests");
  auto result = [](const stats::TestResult& r) {
    py::dict d;
    d["statistic"] = r.statistic;
    d["p_value"] = r.p_value;
    d["df"] = r.df;
    d["df2"] = r.df2;
    return d;
  };
  st.def("shapiro_wilk", [=](const Array& x) { return result(stats::shapiro_wilk(to_vector(x))); });
  st.def("f_test_var", [=](const Array& a, const Array& b) {
    return result(stats::f_test_var(to_vector(a), to_vector(b)));
  });
  st.def("welch_t", [=](const Array& a, const Array& b) {
    return result(stats::welch_t(to_vector(a), to_vector(b)));
  });
  st.def("compare_conditions",
         [=](const py::list& a, const py::list& b, const std::string& metric, AngleChannel channel) {
           std::vector<EvalReport> ra, rb;
           for (auto h : a) ra.push_back(report_from(h));
           for (auto h : b) rb.push_back(report_from(h));
           const auto c = stats::compare_conditions(ra, rb, stats::parse_metric(metric), channel);
           py::dict d;
           d["normality_a"] = result(c.normality_a);
           d["normality_b"] = result(c.normality_b);
           d["variance"] = result(c.variance_test);
           d["welch"] = result(c.welch);
           d["significant"] = c.significant;
           return d;
         },
         py::arg("reports_a"), py::arg("reports_b"), py::arg("metric"), py::arg("channel"));

  m.def("run_pipeline",
        [](const std::filesystem::path& manifest, const std::filesystem::path& out_dir, std::size_t workers) {
          const auto s = run_pipeline(load_manifest(manifest), out_dir, {workers, true});
          py::dict d;
          d["trials"] = s.trials;
          d["failed_trials"] = s.failed_trials;
          d["reports"] = s.reports;
          d["comparisons"] = s.comparisons;
          d["significant"] = s.significant;
          return d;
        },
        py::arg("manifest"), py::arg("out_dir"), py::arg("workers") = 1);
}
