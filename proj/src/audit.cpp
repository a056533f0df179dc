#include "tvaudit/audit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "tvaudit/risk.hpp"

namespace tvaudit {
namespace {

constexpr char kMagic[8] = {'T', 'V', 'W', 'O', 'R', 'L', 'D', '1'};

void require(bool ok, const std::string& message) {
  if (!ok) throw std::runtime_error(message);
}

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T take(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

void put_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * m.size()));
}

Eigen::MatrixXd take_matrix(std::istream& in, int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  in.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(sizeof(double) * m.size()));
  return m;
}

std::ofstream open_out(const std::string& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

double analytic_or_nan(const std::optional<PowerLawFit>& fit, int rank) {
  if (!fit) return std::numeric_limits<double>::quiet_NaN();
  return validity_coverage(*fit, rank).fraction;
}

nlohmann::json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

AuditReport run_audit(const SampleGraph& g, const AuditOptions& options) {
  if (g.edges().empty()) throw std::invalid_argument("empty graph");
  if (options.ranks.empty())
    throw std::invalid_argument("at least one rank is required");
  for (int r : options.ranks)
    if (r < 1) throw std::invalid_argument("ranks must be >= 1");

  AuditReport report;
  report.left_count = g.left_count();
  report.right_count = g.right_count();
  report.edge_count = g.edges().size();
  report.cores = kcore_decompose(g);

  auto fit_side = [&](Side side, std::optional<double> x_min,
                      std::optional<PowerLawFit>& fit, std::string& error) {
    try {
      fit = fit_pareto_tail(degree_sequence(g, side), x_min);
    } catch (const std::exception& e) {
      error = e.what();
    }
  };
  fit_side(Side::Left, options.x_min_left, report.left_fit,
           report.left_fit_error);
  fit_side(Side::Right, options.x_min_right, report.right_fit,
           report.right_fit_error);

  for (int rank : options.ranks) {
    RankRow row;
    row.rank = rank;
    row.left_analytic = analytic_or_nan(report.left_fit, rank);
    row.right_analytic = analytic_or_nan(report.right_fit, rank);
    row.left_empirical = empirical_coverage(report.cores, Side::Left, rank);
    row.right_empirical = empirical_coverage(report.cores, Side::Right, rank);
    report.rank_rows.push_back(row);
  }

  if (!options.group_attribute.empty()) {
    report.group_cdfs =
        group_core_cdf(g, report.cores, Side::Left, options.group_attribute);
    for (int rank : options.ranks) {
      auto verdict = validity_verdict(g, report.cores, rank, Side::Left,
                                      options.group_attribute);
      report.group_possible[rank] = verdict.group_possible_fraction;
    }
  }
  return report;
}

nlohmann::json fit_to_json(const PowerLawFit& fit) {
  return {{"alpha", fit.alpha},       {"x_min", fit.x_min},
          {"n", fit.n},               {"n_tail", fit.n_tail},
          {"side", side_name(fit.side)}, {"ks_distance", fit.ks_distance}};
}

nlohmann::json audit_to_json(const AuditReport& report) {
  nlohmann::json j;
  j["graph"] = {{"left_nodes", report.left_count},
                {"right_nodes", report.right_count},
                {"edges", report.edge_count},
                {"max_core", report.cores.max_core},
                {"min_core", report.cores.min_core()}};

  auto fit_block = [](const std::optional<PowerLawFit>& fit,
                      const std::string& error) -> nlohmann::json {
    if (fit) return fit_to_json(*fit);
    return {{"error", error}};
  };
  j["tail_fit"] = {{"left", fit_block(report.left_fit, report.left_fit_error)},
                   {"right",
                    fit_block(report.right_fit, report.right_fit_error)}};

  j["coverage"] = nlohmann::json::array();
  for (const RankRow& row : report.rank_rows) {
    j["coverage"].push_back(
        {{"rank", row.rank},
         {"left_analytic", finite_or_null(row.left_analytic)},
         {"right_analytic", finite_or_null(row.right_analytic)},
         {"left_empirical", row.left_empirical},
         {"right_empirical", row.right_empirical}});
  }

  if (!report.group_cdfs.empty()) {
    nlohmann::json groups = nlohmann::json::object();
    for (const auto& [name, cdf] : report.group_cdfs)
      groups[name] = cdf.frac_at_least;
    j["group_core_cdf"] = groups;
  }
  if (!report.group_possible.empty()) {
    nlohmann::json by_rank = nlohmann::json::object();
    for (const auto& [rank, fractions] : report.group_possible)
      by_rank[std::to_string(rank)] = fractions;
    j["group_possible_fraction"] = by_rank;
  }
  return j;
}

void write_degree_survival_csv(const SampleGraph& g, const std::string& path) {
  auto out = open_out(path);
  out << "side,degree,survival\n";
  for (Side side : {Side::Left, Side::Right}) {
    std::vector<int> degrees = g.degrees(side);
    std::sort(degrees.begin(), degrees.end());
    const double n = static_cast<double>(degrees.size());
    // One row per distinct degree: fraction of nodes with degree >= d.
    for (std::size_t i = 0; i < degrees.size();) {
      std::size_t j = i;
      while (j < degrees.size() && degrees[j] == degrees[i]) ++j;
      out << side_name(side) << ',' << degrees[i] << ','
          << (n - static_cast<double>(i)) / n << '\n';
      i = j;
    }
  }
}

void write_group_core_cdf_csv(const AuditReport& report,
                              const std::string& path) {
  auto out = open_out(path);
  out << "group,k,frac_core_at_least\n";
  for (const auto& [name, cdf] : report.group_cdfs)
    for (std::size_t k = 0; k < cdf.frac_at_least.size(); ++k)
      out << name << ',' << k << ',' << cdf.frac_at_least[k] << '\n';
}

void write_coverage_csv(const AuditReport& report, const std::string& path) {
  auto out = open_out(path);
  out << "rank,left_analytic,right_analytic,left_empirical,right_empirical\n";
  for (const RankRow& row : report.rank_rows) {
    out << row.rank << ',' << row.left_analytic << ',' << row.right_analytic
        << ',' << row.left_empirical << ',' << row.right_empirical << '\n';
  }
}

void write_world_container(const WorldEnsemble& ensemble,
                           const std::string& bin_path,
                           const std::string& manifest_path) {
  auto out = open_out(bin_path, /*binary=*/true);
  out.write(kMagic, sizeof kMagic);
  const ObservedMask& mask = ensemble.mask;
  put<std::uint32_t>(out, static_cast<std::uint32_t>(mask.rows));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(mask.cols));
  put<std::uint32_t>(out,
                     static_cast<std::uint32_t>(ensemble.subspace_q.cols()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ensemble.worlds.size()));
  put<double>(out, mask.y_min);
  put<double>(out, mask.y_max);
  put<double>(out, ensemble.fit_tol);
  put<double>(out, ensemble.rank_tol);
  put<std::uint64_t>(out, mask.count());
  for (std::size_t i = 0; i < mask.count(); ++i) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(mask.row_idx[i]));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(mask.col_idx[i]));
    put<double>(out, mask.value[i]);
  }
  put_matrix(out, ensemble.subspace_q);
  for (const World& w : ensemble.worlds) {
    put<double>(out, w.fit_residual);
    put<double>(out, w.rank_residual);
    put<std::uint8_t>(out, w.accepted ? 1 : 0);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(w.iterations));
    put_matrix(out, w.matrix);
  }
  require(static_cast<bool>(out), "short write to " + bin_path);
  out.close();

  nlohmann::json manifest = {
      {"format", "tvaudit-worlds"},
      {"version", 1},
      {"rows", mask.rows},
      {"cols", mask.cols},
      {"rank", ensemble.subspace_q.cols()},
      {"worlds", ensemble.worlds.size()},
      {"observed_entries", mask.count()},
      {"y_min", mask.y_min},
      {"y_max", mask.y_max},
      {"fit_tol", ensemble.fit_tol},
      {"rank_tol", ensemble.rank_tol},
      {"base_method", "box-anchored alternating least squares"},
  };
  nlohmann::json rows = nlohmann::json::array();
  for (const World& w : ensemble.worlds)
    rows.push_back({{"fit_residual", w.fit_residual},
                    {"rank_residual", w.rank_residual},
                    {"accepted", w.accepted},
                    {"iterations", w.iterations},
                    {"note", w.note}});
  manifest["world_stats"] = rows;
  auto mout = open_out(manifest_path);
  mout << manifest.dump(2) << '\n';
}

WorldEnsemble read_world_container(const std::string& bin_path) {
  std::ifstream in(bin_path, std::ios::binary);
  require(static_cast<bool>(in), "cannot read " + bin_path);
  char magic[8];
  in.read(magic, sizeof magic);
  require(in && std::memcmp(magic, kMagic, sizeof magic) == 0,
          bin_path + ": not a world container");

  WorldEnsemble ensemble;
  const int rows = static_cast<int>(take<std::uint32_t>(in));
  const int cols = static_cast<int>(take<std::uint32_t>(in));
  const int rank = static_cast<int>(take<std::uint32_t>(in));
  const int count = static_cast<int>(take<std::uint32_t>(in));
  ensemble.mask.rows = rows;
  ensemble.mask.cols = cols;
  ensemble.mask.y_min = take<double>(in);
  ensemble.mask.y_max = take<double>(in);
  ensemble.fit_tol = take<double>(in);
  ensemble.rank_tol = take<double>(in);
  const auto observed = take<std::uint64_t>(in);
  ensemble.mask.row_idx.resize(observed);
  ensemble.mask.col_idx.resize(observed);
  ensemble.mask.value.resize(observed);
  for (std::uint64_t i = 0; i < observed; ++i) {
    ensemble.mask.row_idx[i] = static_cast<int>(take<std::uint32_t>(in));
    ensemble.mask.col_idx[i] = static_cast<int>(take<std::uint32_t>(in));
    ensemble.mask.value[i] = take<double>(in);
  }
  ensemble.subspace_q = take_matrix(in, rows, rank);
  for (int w = 0; w < count; ++w) {
    World world;
    world.rank_bound = rank;
    world.fit_residual = take<double>(in);
    world.rank_residual = take<double>(in);
    world.accepted = take<std::uint8_t>(in) != 0;
    world.iterations = static_cast<int>(take<std::uint32_t>(in));
    world.matrix = take_matrix(in, rows, cols);
    ensemble.worlds.push_back(std::move(world));
  }
  require(static_cast<bool>(in), bin_path + ": truncated world container");
  return ensemble;
}

void write_pair_risk_csv(const DisagreementStats& stats,
                         const std::string& path) {
  auto out = open_out(path);
  out << "world_a,world_b,expected_risk\n";
  for (const PairDisagreement& p : stats.pairs)
    out << p.world_a << ',' << p.world_b << ',' << p.expected_risk << '\n';
}

void write_nae_ecdf_csv(const DisagreementStats& stats,
                        const std::string& path) {
  auto out = open_out(path);
  out << "curve,nae,cumulative_fraction\n";
  auto dump = [&](const std::string& name, const StepEcdf& ecdf) {
    for (std::size_t i = 0; i < ecdf.breakpoints().size(); ++i)
      out << name << ',' << ecdf.breakpoints()[i] << ','
          << ecdf.cumulative()[i] << '\n';
  };
  dump("max_over_worlds", stats.max_nae_ecdf);
  for (const PairDisagreement& p : stats.pairs)
    dump("pair_" + std::to_string(p.world_a) + "_" + std::to_string(p.world_b),
         p.nae_ecdf);
}

}  // namespace tvaudit
