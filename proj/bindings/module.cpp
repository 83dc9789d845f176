#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "prg/runner.hpp"

namespace py = pybind11;
using namespace prg;

namespace {

SquareMatrix to_matrix(const std::vector<std::vector<double>>& rows) {
    const std::size_t k = rows.size();
    SquareMatrix m(k);
    for (std::size_t i = 0; i < k; ++i) {
        if (rows[i].size() != k) throw std::invalid_argument("matrix must be square");
        for (std::size_t j = 0; j < k; ++j) m.at(i, j) = rows[i][j];
    }
    return m;
}

std::vector<std::vector<double>> from_matrix(const SquareMatrix& m) {
    std::vector<std::vector<double>> rows(m.dim(), std::vector<double>(m.dim()));
    for (std::size_t i = 0; i < m.dim(); ++i)
        for (std::size_t j = 0; j < m.dim(); ++j) rows[i][j] = m.at(i, j);
    return rows;
}

}  // namespace

PYBIND11_MODULE(_prg_mnar, m) {
    m.doc() = "MNAR semi-supervised learning testbed: split protocols, class "
              "transition tracking, pseudo-label guidance, and experiment runner";

    m.def("cadr_label_counts",
          [](double gamma, int k) { return cadr_label_counts(gamma, k); },
          py::arg("gamma"), py::arg("k"));
    m.def("ours_label_counts",
          [](int n_labeled, int n1, int k) {
              auto r = ours_label_counts(n_labeled, n1, k);
              return py::make_tuple(r.counts, r.gamma);
          },
          py::arg("n_labeled"), py::arg("n1"), py::arg("k"));
    m.def("darp_counts",
          [](int n1, double gamma_l, int m1, double gamma_u, int k, bool reversed) {
              auto r = darp_counts(n1, gamma_l, m1, gamma_u, k, reversed);
              return py::make_tuple(r.labeled, r.unlabeled);
          },
          py::arg("n1"), py::arg("gamma_l"), py::arg("m1"), py::arg("gamma_u"), py::arg("k"),
          py::arg("reversed") = false);

    m.def("build_transition_matrix",
          [](const std::vector<std::vector<double>>& tracking, double alpha) {
              return from_matrix(build_transition_matrix(to_matrix(tracking), alpha).rows);
          },
          py::arg("tracking"), py::arg("alpha"));
    m.def("class_rescale",
          [](const std::vector<std::vector<double>>& h, double alpha,
             const std::vector<double>& counts) {
              TransitionMatrix tm{to_matrix(h), alpha};
              return from_matrix(class_rescale(tm, PredictionCounts{counts}).rows);
          },
          py::arg("transition"), py::arg("alpha"), py::arg("prediction_counts"));
    m.def("prg_rescale",
          [](const std::vector<double>& p, std::size_t guide_class,
             const std::vector<std::vector<double>>& hp, unsigned steps) {
              return prg_rescale(p, guide_class, RescaledTransitionMatrix{to_matrix(hp)}, steps).p;
          },
          py::arg("p"), py::arg("guide_class"), py::arg("rescaled_transition"), py::arg("steps") = 1);
    m.def("confidence_eta",
          [](const std::vector<double>& p, double tau) {
              auto w = confidence_eta(p, tau);
              return py::make_tuple(w.eta, w.excluded);
          },
          py::arg("p"), py::arg("tau"));
    m.def("distribution_alignment_eta",
          [](const std::vector<double>& prior, const std::vector<double>& running) {
              return distribution_alignment_eta(prior, running).eta;
          },
          py::arg("prior"), py::arg("running"));
    m.def("eta_rescale",
          [](const std::vector<double>& p, const std::vector<double>& eta) {
              return eta_rescale(p, RectifyingWeights{eta, false}).p;
          },
          py::arg("p"), py::arg("eta"));
    m.def("rescaled_ce_gradient", &rescaled_ce_gradient, py::arg("p"), py::arg("p_tilde"));

    m.def("gm_score", &gm_score, py::arg("per_class_recall"));
    m.def("confusion_metrics",
          [](const std::vector<std::vector<int>>& counts) {
              const int k = static_cast<int>(counts.size());
              ConfusionMatrix cm(k);
              for (int i = 0; i < k; ++i)
                  for (int j = 0; j < k; ++j)
                      for (int n = 0; n < counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]; ++n)
                          cm.add(i, j);
              auto pr = per_class_precision_recall(cm);
              return py::make_tuple(accuracy(cm), pr.precision, pr.recall);
          },
          py::arg("counts"), "Returns (accuracy, precision, recall) of an integer confusion matrix");

    py::class_<LabeledSample>(m, "LabeledSample")
        .def_readonly("features", &LabeledSample::features)
        .def_readonly("label", &LabeledSample::label);
    py::class_<UnlabeledSample>(m, "UnlabeledSample")
        .def_readonly("features", &UnlabeledSample::features)
        .def_readonly("hidden_label", &UnlabeledSample::hidden_label)
        .def_readonly("index", &UnlabeledSample::index);
    py::class_<Dataset>(m, "Dataset")
        .def_readonly("labeled", &Dataset::labeled)
        .def_readonly("unlabeled", &Dataset::unlabeled)
        .def_readonly("test", &Dataset::test)
        .def_readonly("class_counts_labeled", &Dataset::class_counts_labeled)
        .def_readonly("class_counts_unlabeled", &Dataset::class_counts_unlabeled)
        .def_readonly("k", &Dataset::k)
        .def_readonly("dim", &Dataset::dim);

    m.def("generate_dataset",
          [](const std::string& config_json, std::uint64_t seed) {
              const auto config = ExperimentConfig::from_json(config_json);
              return generate_dataset(config.synthetic, config.mnar, seed);
          },
          py::arg("config_json"), py::arg("seed"));

    m.def("run",
          [](const std::string& config_json, std::uint64_t seed, const std::string& out_dir) {
              const auto manifest = run(ExperimentConfig::from_json(config_json), seed, out_dir);
              py::dict d;
              d["config_hash"] = manifest.config_hash;
              d["seed"] = manifest.seed;
              d["duration_seconds"] = manifest.duration_seconds;
              d["test_accuracy"] = manifest.final_record.test_accuracy;
              d["gm"] = manifest.final_record.gm;
              d["recall"] = manifest.final_record.recall;
              return d;
          },
          py::arg("config_json"), py::arg("seed"), py::arg("out_dir"));
    m.def("replay", &replay, py::arg("manifest_path"));
    m.def("default_config_json", [] { return ExperimentConfig{}.to_json(); });
}
