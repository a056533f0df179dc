#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tvaudit/graph.hpp"
#include "tvaudit/tail.hpp"
#include "tvaudit/worlds.hpp"

// Forward declaration so the header stays light; the implementation uses the
// bundled nlohmann single header.
#include <json.hpp>

namespace tvaudit {

struct AuditOptions {
  std::vector<int> ranks;            // nonempty, all >= 1
  std::string group_attribute;       // left-side metadata attribute, optional
  std::optional<double> x_min_left;  // fixed tail thresholds; absent = scan
  std::optional<double> x_min_right;
};

struct RankRow {
  int rank = 0;
  // Analytic coverage fractions are NaN when the side's tail fit failed.
  double left_analytic = 0.0, right_analytic = 0.0;
  double left_empirical = 0.0, right_empirical = 0.0;
};

struct AuditReport {
  int left_count = 0, right_count = 0;
  std::size_t edge_count = 0;
  CoreDecomposition cores;
  std::optional<PowerLawFit> left_fit, right_fit;
  std::string left_fit_error, right_fit_error;  // set when the fit failed
  std::vector<RankRow> rank_rows;
  std::map<std::string, CoreCdf> group_cdfs;
  // rank -> group -> fraction of the group whose verdict is still possible.
  std::map<int, std::map<std::string, double>> group_possible;
};

// Full audit: degrees, cores, tail fits on both sides, analytic and
// empirical coverage at every requested rank, group curves when an attribute
// is given. An empty graph is an error ("empty graph").
AuditReport run_audit(const SampleGraph& g, const AuditOptions& options);

nlohmann::json audit_to_json(const AuditReport& report);
nlohmann::json fit_to_json(const PowerLawFit& fit);

// CSV plot data. Columns are documented in the README.
void write_degree_survival_csv(const SampleGraph& g, const std::string& path);
void write_group_core_cdf_csv(const AuditReport& report,
                              const std::string& path);
void write_coverage_csv(const AuditReport& report, const std::string& path);

// World ensemble persistence: little-endian binary container plus a JSON
// manifest describing it.
void write_world_container(const WorldEnsemble& ensemble,
                           const std::string& bin_path,
                           const std::string& manifest_path);
WorldEnsemble read_world_container(const std::string& bin_path);

void write_pair_risk_csv(const DisagreementStats& stats,
                         const std::string& path);
void write_nae_ecdf_csv(const DisagreementStats& stats,
                        const std::string& path);

}  // namespace tvaudit
