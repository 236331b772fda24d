#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "psim/evaluation/bfi.hpp"
#include "psim/evaluation/metrics.hpp"
#include "psim/evaluation/stats.hpp"
#include "psim/evaluation/trueskill.hpp"
#include "psim/kernel.hpp"
#include "psim/replay.hpp"

namespace py = pybind11;
using namespace psim;

namespace {

py::object to_py(const json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

json from_py(const py::object& o) {
  return json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

py::dict stat_dict(const eval::StatTestResult& r) { return to_py(eval::to_json(r)); }

}  // namespace

PYBIND11_MODULE(_psim, m) {
  m.doc() = "Agent sandbox kernel and evaluation suite";

  py::register_exception<Error>(m, "Error");
  py::register_exception<InputError>(m, "InputError", m.attr("Error"));
  py::register_exception<BusyError>(m, "BusyError", m.attr("Error"));
  py::register_exception<LookupError>(m, "LookupError", m.attr("Error"));
  py::register_exception<DegenerateDataError>(m, "DegenerateDataError", m.attr("Error"));
  py::register_exception<InsufficientDataError>(m, "InsufficientDataError", m.attr("Error"));

  py::class_<Kernel>(m, "Kernel")
      .def(py::init([](const py::object& config, const std::string& base_dir) {
             return std::make_unique<Kernel>(config_from_json(from_py(config), base_dir));
           }),
           py::arg("config"), py::arg("base_dir") = "")
      .def("run", &Kernel::run, py::call_guard<py::gil_scoped_release>())
      .def("run_day", &Kernel::run_day)
      .def("step", &Kernel::step)
      .def_property_readonly("finished", &Kernel::finished)
      .def("chat",
           [](Kernel& k, const std::string& agent, const std::string& text) {
             auto r = k.chat(agent, text);
             py::dict d;
             d["agent"] = r.agent;
             d["reply"] = r.reply;
             d["summary"] = r.summary;
             d["day"] = r.day;
             d["tick"] = r.tick;
             return d;
           })
      .def("stage_environment", [](Kernel& k, const std::string& csv) { return to_py(to_json(k.stage_environment(csv))); })
      .def("snapshot", [](const Kernel& k) { return to_py(k.snapshot()); })
      .def("state_view", [](const Kernel& k) { return to_py(k.state_view()); })
      .def("agent", [](const Kernel& k, const std::string& id) { return to_py(k.agent_view(id)); })
      .def("log_lines", [](const Kernel& k) {
        std::vector<std::string> out;
        for (const auto& r : k.log().records()) out.push_back(record_line(r));
        return out;
      });

  m.def("parse_ablations", [](const std::string& s) {
    auto a = parse_ablations(s);
    py::dict d;
    d["disable_feelings"] = a.disable_feelings;
    d["disable_insight"] = a.disable_insight;
    d["disable_growth"] = a.disable_growth;
    d["simple_character"] = a.simple_character;
    return d;
  });

  m.def("score_bfi", [](const std::vector<int>& answers) {
    return to_py(eval::score_bfi({"", 0, answers}).scores);
  });
  m.def("delta_overall", [](const std::array<std::vector<double>, 5>& series) { return eval::delta_overall(series); });
  m.def("euclid_distance", &eval::euclid_distance);
  m.def("activity_level", &eval::activity_level);
  m.def("wilcoxon_signed_rank",
        [](const std::vector<double>& x, double median) { return stat_dict(eval::wilcoxon_signed_rank(x, median)); },
        py::arg("samples"), py::arg("median") = 0.0);
  m.def("cohens_d", &eval::cohens_d);
  m.def("kruskal_wallis", [](const std::vector<std::vector<double>>& g) { return stat_dict(eval::kruskal_wallis(g)); });
  m.def("dunn_posthoc_holm", [](const std::vector<std::vector<double>>& g) {
    py::list out;
    for (const auto& p : eval::dunn_posthoc_holm(g)) {
      py::dict d = stat_dict(p.test);
      d["a"] = p.a;
      d["b"] = p.b;
      out.append(d);
    }
    return out;
  });
  m.def("trueskill_rank", [](const std::vector<std::vector<std::string>>& orders) {
    std::vector<eval::Ranking> rankings;
    for (std::size_t i = 0; i < orders.size(); ++i) rankings.push_back({std::to_string(i), orders[i]});
    std::map<std::string, std::pair<double, double>> out;
    for (const auto& [g, r] : eval::trueskill_rank(rankings)) out[g] = {r.mu, r.sigma};
    return out;
  });

  m.def("metrics", [](const std::string& log_path) { return to_py(eval::to_json(eval::compute_metrics(read_log(log_path)))); });
  m.def("audit", [](const std::string& log_path, int capacity, bool growth) {
    return audit_log(read_log(log_path), {capacity, growth});
  }, py::arg("log_path"), py::arg("memory_capacity") = 30, py::arg("growth_enabled") = true);
}
