// Python surface: graph ingestion, core decomposition, tail fits, scaling
// bounds, possible-world ensembles, and risk estimation.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "tvaudit/audit.hpp"
#include "tvaudit/generators.hpp"
#include "tvaudit/graph.hpp"
#include "tvaudit/risk.hpp"
#include "tvaudit/scaling.hpp"
#include "tvaudit/tail.hpp"
#include "tvaudit/worlds.hpp"

namespace py = pybind11;
using namespace tvaudit;

namespace {

Side side_from_string(const std::string& name) {
  if (name == "left") return Side::Left;
  if (name == "right") return Side::Right;
  throw std::invalid_argument("side must be 'left' or 'right'");
}

LossKind loss_from_string(const std::string& name) {
  if (name == "squared") return LossKind::Squared;
  if (name == "log_loss") return LossKind::LogLoss;
  if (name == "kl") return LossKind::Kl;
  if (name == "itakura_saito") return LossKind::ItakuraSaito;
  throw std::invalid_argument("unknown loss kind: " + name);
}

Estimator estimator_from_string(const std::string& name) {
  if (name == "monte_carlo") return Estimator::MonteCarlo;
  if (name == "horvitz_thompson") return Estimator::HorvitzThompson;
  if (name == "empirical_risk") return Estimator::EmpiricalRisk;
  if (name == "ht_weighted") return Estimator::HtWeightedEmpiricalRisk;
  throw std::invalid_argument("unknown estimator: " + name);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Test-validity auditing for sampled interaction graphs";

  py::class_<SampleGraph>(m, "SampleGraph")
      .def_property_readonly("left_count", &SampleGraph::left_count)
      .def_property_readonly("right_count", &SampleGraph::right_count)
      .def_property_readonly(
          "edge_count", [](const SampleGraph& g) { return g.edges().size(); })
      .def_property_readonly("y_min", &SampleGraph::y_min)
      .def_property_readonly("y_max", &SampleGraph::y_max)
      .def("node_id",
           [](const SampleGraph& g, const std::string& side, int index) {
             return g.node_id(side_from_string(side), index);
           })
      .def("node_index",
           [](const SampleGraph& g, const std::string& side,
              const std::string& id) {
             return g.node_index(side_from_string(side), id);
           })
      .def("degrees",
           [](const SampleGraph& g, const std::string& side) {
             return g.degrees(side_from_string(side));
           })
      .def("meta",
           [](const SampleGraph& g, const std::string& side,
              int index) -> py::object {
             const MetaRecord* record =
                 g.meta(side_from_string(side), index);
             if (record == nullptr) return py::none();
             return py::cast(*record);
           })
      .def("__repr__", [](const SampleGraph& g) {
        return "SampleGraph(left=" + std::to_string(g.left_count()) +
               ", right=" + std::to_string(g.right_count()) +
               ", edges=" + std::to_string(g.edges().size()) + ")";
      });

  m.def("build_graph",
        [](const std::vector<std::tuple<std::string, std::string, double>>&
               edges,
           double y_min, double y_max) {
          SampleGraph::Builder builder(y_min, y_max);
          for (const auto& [left, right, label] : edges) {
            const int l = builder.intern(Side::Left, left);
            const int r = builder.intern(Side::Right, right);
            builder.add_edge(l, r, label);
          }
          return builder.build();
        },
        py::arg("edges"), py::arg("y_min") = 1.0, py::arg("y_max") = 5.0,
        "Build a bipartite graph from (left_id, right_id, label) triples");

  m.def("ingest_movielens", &ingest_movielens, py::arg("data_path"),
        py::arg("user_meta_path") = std::string());
  m.def("ingest_edge_list",
        [](const std::string& path, double label_min, double label_max,
           const std::string& left_col, const std::string& right_col,
           const std::string& label_col, const std::string& timestamp_col,
           const std::string& delimiter, bool has_header) {
          EdgeListSchema schema;
          schema.left_column = left_col;
          schema.right_column = right_col;
          schema.label_column = label_col;
          schema.timestamp_column = timestamp_col;
          if (delimiter.size() != 1)
            throw std::invalid_argument("delimiter must be one character");
          schema.delimiter = delimiter[0];
          schema.has_header = has_header;
          return ingest_edge_list(path, schema, {label_min, label_max});
        },
        py::arg("path"), py::arg("label_min") = 1.0, py::arg("label_max") = 5.0,
        py::arg("left_col") = "left", py::arg("right_col") = "right",
        py::arg("label_col") = std::string(),
        py::arg("timestamp_col") = std::string(), py::arg("delimiter") = "\t",
        py::arg("has_header") = true);
  m.def("write_edge_list", &write_edge_list, py::arg("graph"), py::arg("path"));

  py::class_<CoreDecomposition>(m, "CoreDecomposition")
      .def_readonly("left_core", &CoreDecomposition::left_core)
      .def_readonly("right_core", &CoreDecomposition::right_core)
      .def_readonly("max_core", &CoreDecomposition::max_core)
      .def("min_core", &CoreDecomposition::min_core);

  m.def("kcore_decompose", &kcore_decompose, py::arg("graph"));
  m.def("is_k_connected",
        [](const SampleGraph& g, int k, const std::string& rule) {
          const ConnectivityRule r = rule == "degree_only"
                                         ? ConnectivityRule::DegreeOnly
                                         : ConnectivityRule::KCore;
          return is_k_connected(g, k, r);
        },
        py::arg("graph"), py::arg("k"), py::arg("rule") = "kcore");
  m.def("group_core_cdf",
        [](const SampleGraph& g, const CoreDecomposition& cd,
           const std::string& side, const std::string& attribute) {
          std::map<std::string, std::vector<double>> out;
          for (auto& [name, cdf] :
               group_core_cdf(g, cd, side_from_string(side), attribute))
            out[name] = cdf.frac_at_least;
          return out;
        },
        py::arg("graph"), py::arg("cores"), py::arg("side"),
        py::arg("attribute"));

  py::class_<PowerLawFit>(m, "PowerLawFit")
      .def_readonly("alpha", &PowerLawFit::alpha)
      .def_readonly("x_min", &PowerLawFit::x_min)
      .def_readonly("n", &PowerLawFit::n)
      .def_readonly("n_tail", &PowerLawFit::n_tail)
      .def_readonly("ks_distance", &PowerLawFit::ks_distance)
      .def("__repr__", [](const PowerLawFit& f) {
        return "PowerLawFit(alpha=" + std::to_string(f.alpha) +
               ", x_min=" + std::to_string(f.x_min) + ")";
      });

  m.def("fit_pareto_tail",
        [](const SampleGraph& g, const std::string& side,
           std::optional<double> x_min) {
          return fit_pareto_tail(degree_sequence(g, side_from_string(side)),
                                 x_min);
        },
        py::arg("graph"), py::arg("side") = "right",
        py::arg("x_min") = py::none());
  m.def("fit_pareto_tail_values",
        [](std::vector<double> values, std::optional<double> x_min) {
          return fit_pareto_tail(std::move(values), x_min);
        },
        py::arg("values"), py::arg("x_min") = py::none());
  m.def("survival", &survival, py::arg("fit"), py::arg("k"));
  m.def("validity_coverage",
        [](const PowerLawFit& fit, int rank_k) {
          Coverage c = validity_coverage(fit, rank_k);
          return py::make_tuple(c.expected_nodes, c.fraction);
        },
        py::arg("fit"), py::arg("rank_k"),
        "Returns (expected_nodes, fraction)");
  m.def("empirical_coverage",
        [](const CoreDecomposition& cd, const std::string& side, int rank_k) {
          return empirical_coverage(cd, side_from_string(side), rank_k);
        },
        py::arg("cores"), py::arg("side"), py::arg("rank_k"));

  m.def("scaling_bound", &scaling_bound, py::arg("alpha"), py::arg("x_min"),
        py::arg("domain_size"));
  m.def("log10_scaling_bound", &log10_scaling_bound, py::arg("alpha"),
        py::arg("x_min"), py::arg("domain_size"));
  m.def("benchmark_cost", &benchmark_cost, py::arg("alpha"), py::arg("x_min"),
        py::arg("domain_size"), py::arg("threshold_x") = 100.0);
  m.def("simulate_first_success", &simulate_first_success, py::arg("p"),
        py::arg("trials"), py::arg("seed"));
  m.def("simulate_coverage_growth",
        [](double alpha, double x_min, int domain_size, int rank_k,
           const std::vector<long long>& schedule, std::uint64_t seed,
           const std::string& weights) {
          const WeightLaw law =
              weights == "uniform" ? WeightLaw::Uniform : WeightLaw::Pareto;
          std::vector<std::pair<long long, double>> out;
          for (const CoveragePoint& p : simulate_coverage_growth(
                   alpha, x_min, domain_size, rank_k, schedule, seed, law))
            out.emplace_back(p.m, p.fraction);
          return out;
        },
        py::arg("alpha"), py::arg("x_min"), py::arg("domain_size"),
        py::arg("rank_k"), py::arg("schedule"), py::arg("seed"),
        py::arg("weights") = "pareto");

  py::class_<ObservedMask>(m, "ObservedMask")
      .def_readonly("rows", &ObservedMask::rows)
      .def_readonly("cols", &ObservedMask::cols)
      .def_readonly("row_idx", &ObservedMask::row_idx)
      .def_readonly("col_idx", &ObservedMask::col_idx)
      .def_readonly("value", &ObservedMask::value)
      .def_property_readonly("count", &ObservedMask::count);
  m.def("observed_mask", &observed_mask, py::arg("graph"));

  py::class_<World>(m, "World")
      .def_readonly("matrix", &World::matrix)
      .def_readonly("fit_residual", &World::fit_residual)
      .def_readonly("rank_residual", &World::rank_residual)
      .def_readonly("accepted", &World::accepted)
      .def_readonly("note", &World::note);

  py::class_<WorldEnsemble>(m, "WorldEnsemble")
      .def_readonly("worlds", &WorldEnsemble::worlds)
      .def_readonly("subspace_q", &WorldEnsemble::subspace_q)
      .def_readonly("fit_tol", &WorldEnsemble::fit_tol)
      .def_readonly("rank_tol", &WorldEnsemble::rank_tol);

  m.def("generate_ensemble",
        [](const ObservedMask& mask, int rank_k, int p, std::uint64_t seed) {
          return generate_ensemble(mask, rank_k, p, seed);
        },
        py::arg("mask"), py::arg("rank_k"), py::arg("p"), py::arg("seed"));

  py::class_<DisagreementStats>(m, "DisagreementStats")
      .def_readonly("median_max_nae", &DisagreementStats::median_max_nae)
      .def_readonly("min_pairwise_rms", &DisagreementStats::min_pairwise_rms)
      .def_readonly("unobserved_count", &DisagreementStats::unobserved_count)
      .def_property_readonly("pair_expected_risks",
                             [](const DisagreementStats& s) {
                               std::vector<std::tuple<int, int, double>> out;
                               for (const PairDisagreement& p : s.pairs)
                                 out.emplace_back(p.world_a, p.world_b,
                                                  p.expected_risk);
                               return out;
                             });
  m.def("disagreement_stats",
        [](const WorldEnsemble& e) { return disagreement_stats(e); },
        py::arg("ensemble"));

  m.def("nae", &nae, py::arg("a"), py::arg("b"), py::arg("y_min"),
        py::arg("y_max"));
  m.def("loss",
        [](const std::string& kind, double a, double b) {
          return loss(loss_from_string(kind), a, b);
        },
        py::arg("kind"), py::arg("a"), py::arg("b"));
  m.def("estimate_risk",
        [](const std::string& estimator, const std::string& kind,
           const std::vector<std::tuple<int, int, double, double>>& samples,
           std::optional<std::vector<double>> weights) {
          std::vector<EntrySample> entries;
          for (const auto& [row, col, f_val, h_val] : samples)
            entries.push_back({row, col, f_val, h_val});
          const Estimator est = estimator_from_string(estimator);
          const LossKind lk = loss_from_string(kind);
          const RiskEstimate r = weights
                                     ? estimate_risk(est, entries, *weights, lk)
                                     : estimate_risk(est, entries, lk);
          return r.value;
        },
        py::arg("estimator"), py::arg("kind"), py::arg("samples"),
        py::arg("weights") = py::none(),
        "samples are (row, col, f_val, h_val) tuples");
  m.def("is_isomeric", &is_isomeric, py::arg("f"), py::arg("observed"),
        py::arg("rank_scale") = 1.0);
  m.def("hoeffding_bound", &hoeffding_bound, py::arg("m"), py::arg("delta"));
  m.def("markov_lower_bound", &markov_lower_bound, py::arg("epsilon"),
        py::arg("prob_exceed"));

  m.def("validity_verdict",
        [](const SampleGraph& g, int rank, const std::string& attribute) {
          CoreDecomposition cd = kcore_decompose(g);
          ValidityVerdict v =
              attribute.empty()
                  ? validity_verdict(cd, rank)
                  : validity_verdict(g, cd, rank, Side::Left, attribute);
          py::dict out;
          out["rank"] = v.rank_assumed;
          out["left_possible_fraction"] = v.left_possible_fraction;
          out["right_possible_fraction"] = v.right_possible_fraction;
          out["group_possible_fraction"] = v.group_possible_fraction;
          return out;
        },
        py::arg("graph"), py::arg("rank"),
        py::arg("attribute") = std::string());

  m.def("audit_json",
        [](const SampleGraph& g, const std::vector<int>& ranks,
           const std::string& group_attribute,
           std::optional<double> x_min_left,
           std::optional<double> x_min_right) {
          AuditOptions options;
          options.ranks = ranks;
          options.group_attribute = group_attribute;
          options.x_min_left = x_min_left;
          options.x_min_right = x_min_right;
          return audit_to_json(run_audit(g, options)).dump();
        },
        py::arg("graph"), py::arg("ranks"),
        py::arg("group_attribute") = std::string(),
        py::arg("x_min_left") = py::none(),
        py::arg("x_min_right") = py::none(),
        "Full audit as a JSON string");

  m.def("generate_ba",
        [](int n, int m_attach, std::uint64_t seed) {
          BaConfig config;
          config.n_nodes = n;
          config.m_attach = m_attach;
          config.seed = seed;
          return generate_ba(config);
        },
        py::arg("n"), py::arg("m_attach"), py::arg("seed"));
  m.def("generate_pareto_bipartite",
        [](int n_left, int n_right, long long m_edges, double alpha,
           double x_min, std::uint64_t seed) {
          ParetoBipartiteConfig config;
          config.n_left = n_left;
          config.n_right = n_right;
          config.m_edges = m_edges;
          config.alpha = alpha;
          config.x_min = x_min;
          config.seed = seed;
          return generate_pareto_bipartite(config);
        },
        py::arg("n_left"), py::arg("n_right"), py::arg("m_edges"),
        py::arg("alpha"), py::arg("x_min"), py::arg("seed"));
}
