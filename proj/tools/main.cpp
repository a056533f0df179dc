// tvaudit: audit a sampled interaction graph for test-validity, generate
// possible-world ensembles, and tabulate scaling bounds.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tvaudit/audit.hpp"
#include "tvaudit/graph.hpp"
#include "tvaudit/risk.hpp"
#include "tvaudit/scaling.hpp"
#include "tvaudit/tail.hpp"
#include "tvaudit/worlds.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tvaudit;

namespace {

// ---- configuration plumbing ------------------------------------------------

// Flags win over the config file, the config file over defaults. Subcommand
// keys live under a section named like the subcommand; seed/out_dir/format
// sit at the top level.
struct Ctx {
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  std::string format = "json";
  json config = json::object();
  json resolved = json::object();  // what actually ran, echoed into reports

  json section(const std::string& name) const {
    if (config.contains(name) && config[name].is_object()) return config[name];
    return json::object();
  }
};

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file " + path);
  json parsed;
  try {
    in >> parsed;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
  if (!parsed.is_object())
    throw std::invalid_argument(path + ": config must be a JSON object");
  return parsed;
}

// One value through the flag > file > default chain.
template <typename T>
T resolve(const CLI::Option* opt, T flag_value, const json& section,
          const std::string& key) {
  if (opt != nullptr && opt->count() > 0) return flag_value;
  if (section.contains(key)) return section[key].get<T>();
  return flag_value;
}

bool resolved_present(const CLI::Option* opt, const json& section,
                      const std::string& key) {
  return (opt != nullptr && opt->count() > 0) || section.contains(key);
}

void ensure_out_dir(const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec)
    throw std::invalid_argument("cannot create output directory " + out_dir +
                                ": " + ec.message());
}

std::string out_path(const Ctx& ctx, const std::string& name) {
  return (fs::path(ctx.out_dir) / name).string();
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

// ---- shared input options --------------------------------------------------

struct InputOpts {
  std::string edge_list;
  std::string movielens_dir;
  std::string left_col = "left", right_col = "right";
  std::string label_col, timestamp_col;
  std::string delimiter = "\t";
  bool no_header = false;
  double label_min = 1.0, label_max = 5.0;

  CLI::Option *edge_opt = nullptr, *ml_opt = nullptr, *left_opt = nullptr,
              *right_opt = nullptr, *label_opt = nullptr, *ts_opt = nullptr,
              *delim_opt = nullptr, *header_opt = nullptr, *lmin_opt = nullptr,
              *lmax_opt = nullptr;
};

void add_input_options(CLI::App* sub, InputOpts& in) {
  in.edge_opt = sub->add_option("--input", in.edge_list,
                                "Edge-list file to audit (delimited text)");
  in.ml_opt = sub->add_option(
      "--movielens", in.movielens_dir,
      "MovieLens 100k directory (expects u.data and, if present, u.user)");
  in.left_opt = sub->add_option("--left-col", in.left_col,
                                "Edge list: left id column name or index");
  in.right_opt = sub->add_option("--right-col", in.right_col,
                                 "Edge list: right id column name or index");
  in.label_opt = sub->add_option("--label-col", in.label_col,
                                 "Edge list: label column (default: none)");
  in.ts_opt = sub->add_option("--timestamp-col", in.timestamp_col,
                              "Edge list: timestamp column (default: none)");
  in.delim_opt = sub->add_option("--delimiter", in.delimiter,
                                 "Edge list field delimiter (default tab)");
  in.header_opt = sub->add_flag("--no-header", in.no_header,
                                "Edge list has no header row");
  in.lmin_opt =
      sub->add_option("--label-min", in.label_min, "Smallest legal label");
  in.lmax_opt =
      sub->add_option("--label-max", in.label_max, "Largest legal label");
}

SampleGraph load_graph(const InputOpts& in, const json& section, Ctx& ctx) {
  const std::string edge_list =
      resolve(in.edge_opt, in.edge_list, section, "input");
  const std::string ml_dir =
      resolve(in.ml_opt, in.movielens_dir, section, "movielens");
  if (!edge_list.empty() && !ml_dir.empty())
    throw std::invalid_argument("--input and --movielens are exclusive");

  if (!ml_dir.empty()) {
    const fs::path dir(ml_dir);
    const fs::path data = dir / "u.data";
    const fs::path users = dir / "u.user";
    ctx.resolved["input"] = {{"movielens", ml_dir}};
    return ingest_movielens(data.string(),
                            fs::exists(users) ? users.string() : std::string());
  }
  if (edge_list.empty())
    throw std::invalid_argument("an input is required (--input or --movielens)");

  EdgeListSchema schema;
  schema.left_column = resolve(in.left_opt, in.left_col, section, "left_col");
  schema.right_column =
      resolve(in.right_opt, in.right_col, section, "right_col");
  schema.label_column =
      resolve(in.label_opt, in.label_col, section, "label_col");
  schema.timestamp_column =
      resolve(in.ts_opt, in.timestamp_col, section, "timestamp_col");
  const std::string delim =
      resolve(in.delim_opt, in.delimiter, section, "delimiter");
  if (delim.size() != 1)
    throw std::invalid_argument("--delimiter must be a single character");
  schema.delimiter = delim[0];
  schema.has_header = !resolve(in.header_opt, in.no_header, section,
                               "no_header");
  const double lo = resolve(in.lmin_opt, in.label_min, section, "label_min");
  const double hi = resolve(in.lmax_opt, in.label_max, section, "label_max");
  ctx.resolved["input"] = {{"edge_list", edge_list},
                           {"delimiter", delim},
                           {"has_header", schema.has_header},
                           {"label_min", lo},
                           {"label_max", hi}};
  return ingest_edge_list(edge_list, schema, {lo, hi});
}

Side parse_side(const std::string& name) {
  if (name == "left") return Side::Left;
  if (name == "right") return Side::Right;
  throw std::invalid_argument("side must be 'left' or 'right'");
}

// ---- audit -----------------------------------------------------------------

struct AuditArgs {
  InputOpts in;
  std::vector<int> ranks{8, 10, 20, 50, 100};
  std::string group_attribute;
  double x_min_left = 0.0, x_min_right = 0.0;
  CLI::Option *ranks_opt = nullptr, *group_opt = nullptr, *xl_opt = nullptr,
              *xr_opt = nullptr;
};

int cmd_audit(AuditArgs& args, Ctx& ctx) {
  const json section = ctx.section("audit");
  SampleGraph g = load_graph(args.in, section, ctx);

  AuditOptions options;
  options.ranks = resolve(args.ranks_opt, args.ranks, section, "ranks");
  options.group_attribute = resolve(args.group_opt, args.group_attribute,
                                    section, "group_attribute");
  if (resolved_present(args.xl_opt, section, "x_min_left"))
    options.x_min_left =
        resolve(args.xl_opt, args.x_min_left, section, "x_min_left");
  if (resolved_present(args.xr_opt, section, "x_min_right"))
    options.x_min_right =
        resolve(args.xr_opt, args.x_min_right, section, "x_min_right");

  ctx.resolved["ranks"] = options.ranks;
  if (!options.group_attribute.empty())
    ctx.resolved["group_attribute"] = options.group_attribute;
  if (options.x_min_left) ctx.resolved["x_min_left"] = *options.x_min_left;
  if (options.x_min_right) ctx.resolved["x_min_right"] = *options.x_min_right;

  AuditReport report = run_audit(g, options);

  ensure_out_dir(ctx.out_dir);
  json doc = {{"config", ctx.resolved}, {"report", audit_to_json(report)}};
  write_json_file(out_path(ctx, "audit.json"), doc);
  write_degree_survival_csv(g, out_path(ctx, "degree_survival.csv"));
  write_coverage_csv(report, out_path(ctx, "coverage.csv"));
  if (!report.group_cdfs.empty())
    write_group_core_cdf_csv(report, out_path(ctx, "group_core_cdf.csv"));

  if (ctx.format == "json") {
    std::cout << doc["report"].dump(2) << '\n';
  } else {
    std::cout << "rank,left_analytic,right_analytic,left_empirical,"
                 "right_empirical\n";
    for (const RankRow& row : report.rank_rows)
      std::cout << row.rank << ',' << row.left_analytic << ','
                << row.right_analytic << ',' << row.left_empirical << ','
                << row.right_empirical << '\n';
  }
  return 0;
}

// ---- worlds ----------------------------------------------------------------

struct WorldsArgs {
  InputOpts in;
  int rank_k = 50;
  int p = 100;
  double fit_tol = 1e-3, rank_tol = 1e-2;
  int max_iters = 400, polish_iters = 2000;
  bool no_stats = false;
  CLI::Option *k_opt = nullptr, *p_opt = nullptr, *ft_opt = nullptr,
              *rt_opt = nullptr, *mi_opt = nullptr, *pi_opt = nullptr,
              *ns_opt = nullptr;
};

int cmd_worlds(WorldsArgs& args, Ctx& ctx) {
  const json section = ctx.section("worlds");
  SampleGraph g = load_graph(args.in, section, ctx);

  const int rank_k = resolve(args.k_opt, args.rank_k, section, "rank_k");
  const int p = resolve(args.p_opt, args.p, section, "worlds");
  const bool stats = !resolve(args.ns_opt, args.no_stats, section, "no_stats");
  WorldGenConfig config;
  config.fit_tol = resolve(args.ft_opt, args.fit_tol, section, "fit_tol");
  config.rank_tol = resolve(args.rt_opt, args.rank_tol, section, "rank_tol");
  config.max_iters = resolve(args.mi_opt, args.max_iters, section, "max_iters");
  config.polish_iters =
      resolve(args.pi_opt, args.polish_iters, section, "polish_iters");

  if (rank_k < 1) throw std::invalid_argument("rank must be >= 1");
  if (p < 1) throw std::invalid_argument("world count must be >= 1");
  if (stats && p < 2)
    throw std::invalid_argument(
        "disagreement statistics need at least two worlds; "
        "rerun with --worlds >= 2 or --no-stats");

  ctx.resolved["rank_k"] = rank_k;
  ctx.resolved["worlds"] = p;
  ctx.resolved["fit_tol"] = config.fit_tol;
  ctx.resolved["rank_tol"] = config.rank_tol;
  ctx.resolved["stats"] = stats;
  ctx.resolved["base_method"] = "box-anchored alternating least squares";

  ObservedMask mask = observed_mask(g);
  WorldEnsemble ensemble = generate_ensemble(mask, rank_k, p, ctx.seed, config);

  ensure_out_dir(ctx.out_dir);
  write_world_container(ensemble, out_path(ctx, "worlds.bin"),
                        out_path(ctx, "worlds_manifest.json"));

  json summary = {{"config", ctx.resolved},
                  {"rows", mask.rows},
                  {"cols", mask.cols},
                  {"observed_entries", mask.count()}};
  int accepted = 0;
  for (const World& w : ensemble.worlds) accepted += w.accepted ? 1 : 0;
  summary["accepted_worlds"] = accepted;

  if (stats) {
    DisagreementStats ds = disagreement_stats(ensemble);
    write_pair_risk_csv(ds, out_path(ctx, "pair_risk.csv"));
    write_nae_ecdf_csv(ds, out_path(ctx, "nae_ecdf.csv"));
    summary["median_max_nae"] = ds.median_max_nae;
    summary["min_pairwise_rms"] = ds.min_pairwise_rms;
    double min_risk = std::numeric_limits<double>::infinity();
    for (const PairDisagreement& pd : ds.pairs)
      min_risk = std::min(min_risk, pd.expected_risk);
    summary["min_pair_expected_risk"] = min_risk;
  }
  write_json_file(out_path(ctx, "worlds_summary.json"), summary);

  if (ctx.format == "json") {
    std::cout << summary.dump(2) << '\n';
  } else {
    std::cout << "world,fit_residual,rank_residual,accepted\n";
    for (std::size_t i = 0; i < ensemble.worlds.size(); ++i) {
      const World& w = ensemble.worlds[i];
      std::cout << i << ',' << w.fit_residual << ',' << w.rank_residual << ','
                << (w.accepted ? 1 : 0) << '\n';
    }
  }
  return 0;
}

// ---- simulate --------------------------------------------------------------

struct SimulateArgs {
  double alpha = 2.5, x_min = 5.0, population = 1e7, threshold = 0.0;
  double success_prob = 0.0;
  int domain_size = 0, rank_k = 1;
  std::int64_t max_draws = 10000;
  int curve_points = 50, trials = 20;
  std::string weights = "pareto";
  CLI::Option *a_opt = nullptr, *x_opt = nullptr, *n_opt = nullptr,
              *t_opt = nullptr, *sp_opt = nullptr, *ds_opt = nullptr,
              *rk_opt = nullptr, *md_opt = nullptr, *cp_opt = nullptr,
              *tr_opt = nullptr, *w_opt = nullptr;
};

int cmd_simulate(SimulateArgs& args, Ctx& ctx) {
  const json section = ctx.section("simulate");
  const bool want_bounds = resolved_present(args.a_opt, section, "alpha");
  const bool want_growth =
      resolved_present(args.ds_opt, section, "domain_size");
  const bool want_first =
      resolved_present(args.sp_opt, section, "success_prob");
  if (!want_bounds && !want_growth && !want_first)
    throw std::invalid_argument(
        "nothing to simulate: give --alpha (bound table), --domain-size "
        "(coverage growth), or --success-prob (first success)");

  ensure_out_dir(ctx.out_dir);
  std::mt19937_64 rng(ctx.seed);
  json summary = json::object();

  if (want_bounds) {
    const double alpha = resolve(args.a_opt, args.alpha, section, "alpha");
    const double x_min = resolve(args.x_opt, args.x_min, section, "x_min");
    const double pop = resolve(args.n_opt, args.population, section,
                               "population");
    ctx.resolved["alpha"] = alpha;
    ctx.resolved["x_min"] = x_min;
    ctx.resolved["population"] = pop;

    const double log_bound = log10_scaling_bound(alpha, x_min, pop);
    std::ofstream out(out_path(ctx, "simulate_bounds.csv"));
    if (!out) throw std::runtime_error("cannot write simulate_bounds.csv");
    out << "alpha,x_min,population,log10_scaling_bound,threshold,"
           "benchmark_cost\n";
    summary["log10_scaling_bound"] = log_bound;
    if (resolved_present(args.t_opt, section, "threshold")) {
      const double threshold =
          resolve(args.t_opt, args.threshold, section, "threshold");
      ctx.resolved["threshold"] = threshold;
      const double cost = benchmark_cost(alpha, x_min, pop, threshold);
      out << alpha << ',' << x_min << ',' << pop << ',' << log_bound << ','
          << threshold << ',' << cost << '\n';
      summary["benchmark_cost"] = cost;
    } else {
      out << alpha << ',' << x_min << ',' << pop << ',' << log_bound << ",,\n";
    }
  }

  if (want_growth) {
    const int n = resolve(args.ds_opt, args.domain_size, section,
                          "domain_size");
    const int rank_k = resolve(args.rk_opt, args.rank_k, section, "rank_k");
    const auto max_draws = static_cast<std::int64_t>(resolve(
        args.md_opt, static_cast<double>(args.max_draws), section,
        "max_draws"));
    const int points = resolve(args.cp_opt, args.curve_points, section,
                               "curve_points");
    const int trials = resolve(args.tr_opt, args.trials, section, "trials");
    const std::string weights =
        resolve(args.w_opt, args.weights, section, "weights");
    const double alpha = resolve(args.a_opt, args.alpha, section, "alpha");
    const double x_min = resolve(args.x_opt, args.x_min, section, "x_min");

    const WeightLaw law =
        weights == "uniform" ? WeightLaw::Uniform : WeightLaw::Pareto;
    ctx.resolved["coverage_growth"] = {{"domain_size", n},
                                       {"rank_k", rank_k},
                                       {"max_draws", max_draws},
                                       {"trials", trials},
                                       {"weights", weights}};

    std::vector<long long> schedule;
    for (int i = 1; i <= points; ++i) {
      const auto m = std::max<long long>(
          1, static_cast<long long>(static_cast<double>(max_draws) * i /
                                    points));
      if (schedule.empty() || schedule.back() != m) schedule.push_back(m);
    }

    std::ofstream out(out_path(ctx, "coverage_growth.csv"));
    if (!out) throw std::runtime_error("cannot write coverage_growth.csv");
    out << "draws,mean_coverage\n";
    std::vector<double> mean(schedule.size(), 0.0);
    for (int t = 0; t < trials; ++t) {
      std::vector<CoveragePoint> curve = simulate_coverage_growth(
          alpha, x_min, n, rank_k, schedule, rng(), law);
      for (std::size_t i = 0; i < curve.size(); ++i)
        mean[i] += curve[i].fraction;
    }
    double final_coverage = 0.0;
    for (std::size_t i = 0; i < schedule.size(); ++i) {
      mean[i] /= std::max(1, trials);
      out << schedule[i] << ',' << mean[i] << '\n';
      final_coverage = mean[i];
    }
    summary["final_mean_coverage"] = final_coverage;
  }

  if (want_first) {
    const double prob =
        resolve(args.sp_opt, args.success_prob, section, "success_prob");
    const int trials = resolve(args.tr_opt, args.trials, section, "trials");
    ctx.resolved["first_success"] = {{"prob", prob}, {"trials", trials}};
    const double mean = simulate_first_success(prob, trials, rng());
    std::ofstream out(out_path(ctx, "first_success.csv"));
    if (!out) throw std::runtime_error("cannot write first_success.csv");
    out << "trials,mean_draws_to_first_success\n"
        << trials << ',' << mean << '\n';
    summary["mean_draws_to_first_success"] = mean;
  }

  summary["config"] = ctx.resolved;
  write_json_file(out_path(ctx, "simulate_summary.json"), summary);
  if (ctx.format == "json") std::cout << summary.dump(2) << '\n';
  return 0;
}

// ---- fit-tail --------------------------------------------------------------

struct FitTailArgs {
  InputOpts in;
  std::string values_path;
  std::string side = "right";
  double x_min = 0.0;
  std::vector<int> ranks;
  CLI::Option *v_opt = nullptr, *s_opt = nullptr, *x_opt = nullptr,
              *r_opt = nullptr;
};

int cmd_fit_tail(FitTailArgs& args, Ctx& ctx) {
  const json section = ctx.section("fit_tail");
  const std::string values_path =
      resolve(args.v_opt, args.values_path, section, "values");
  const std::string side_name_str =
      resolve(args.s_opt, args.side, section, "side");
  const Side side = parse_side(side_name_str);
  std::optional<double> x_min;
  if (resolved_present(args.x_opt, section, "x_min"))
    x_min = resolve(args.x_opt, args.x_min, section, "x_min");

  PowerLawFit fit;
  if (!values_path.empty()) {
    std::ifstream in(values_path);
    if (!in) throw std::invalid_argument("cannot read " + values_path);
    std::vector<double> values;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      try {
        values.push_back(std::stod(line));
      } catch (const std::exception&) {
        throw std::invalid_argument(values_path + ":" +
                                    std::to_string(line_no) +
                                    ": not a number: " + line);
      }
    }
    ctx.resolved["values"] = values_path;
    fit = fit_pareto_tail(std::move(values), x_min, side);
  } else {
    SampleGraph g = load_graph(args.in, section, ctx);
    fit = fit_pareto_tail(degree_sequence(g, side), x_min);
  }
  ctx.resolved["side"] = side_name_str;
  if (x_min) ctx.resolved["x_min"] = *x_min;

  json doc = {{"config", ctx.resolved}, {"fit", fit_to_json(fit)}};
  const std::vector<int> ranks =
      resolve(args.r_opt, args.ranks, section, "ranks");
  if (!ranks.empty()) {
    json rows = json::array();
    for (int rank : ranks) {
      if (rank < 1) throw std::invalid_argument("ranks must be >= 1");
      Coverage c = validity_coverage(fit, rank);
      rows.push_back({{"rank", rank},
                      {"fraction", c.fraction},
                      {"expected_nodes", c.expected_nodes}});
    }
    doc["coverage"] = rows;
  }

  ensure_out_dir(ctx.out_dir);
  write_json_file(out_path(ctx, "tail_fit.json"), doc);
  if (ctx.format == "json") {
    std::cout << doc.dump(2) << '\n';
  } else {
    std::cout << "alpha,x_min,n_tail,ks_distance\n"
              << fit.alpha << ',' << fit.x_min << ',' << fit.n_tail << ','
              << fit.ks_distance << '\n';
  }
  return 0;
}

// ---- verdict ---------------------------------------------------------------

struct VerdictArgs {
  InputOpts in;
  int rank = 0;
  std::string group_attribute;
  CLI::Option *r_opt = nullptr, *g_opt = nullptr;
};

int cmd_verdict(VerdictArgs& args, Ctx& ctx) {
  const json section = ctx.section("verdict");
  const int rank = resolve(args.r_opt, args.rank, section, "rank");
  if (rank < 1) throw std::invalid_argument("--rank must be >= 1");
  const std::string attribute =
      resolve(args.g_opt, args.group_attribute, section, "group_attribute");

  SampleGraph g = load_graph(args.in, section, ctx);
  if (g.edges().empty()) throw std::invalid_argument("empty graph");
  CoreDecomposition cd = kcore_decompose(g);
  ValidityVerdict verdict =
      attribute.empty()
          ? validity_verdict(cd, rank)
          : validity_verdict(g, cd, rank, Side::Left, attribute);

  ctx.resolved["rank"] = rank;
  if (!attribute.empty()) ctx.resolved["group_attribute"] = attribute;

  json doc = {{"config", ctx.resolved},
              {"rank", rank},
              {"left_possible_fraction", verdict.left_possible_fraction},
              {"right_possible_fraction", verdict.right_possible_fraction}};
  if (!verdict.group_possible_fraction.empty())
    doc["group_possible_fraction"] = verdict.group_possible_fraction;

  ensure_out_dir(ctx.out_dir);
  write_json_file(out_path(ctx, "verdict.json"), doc);
  if (ctx.format == "json") {
    std::cout << doc.dump(2) << '\n';
  } else {
    std::cout << "scope,possible_fraction\n";
    std::cout << "left," << verdict.left_possible_fraction << '\n';
    std::cout << "right," << verdict.right_possible_fraction << '\n';
    for (const auto& [group, fraction] : verdict.group_possible_fraction)
      std::cout << "left:" << group << ',' << fraction << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "tvaudit: test-validity auditing for sampled interaction graphs"};
  app.require_subcommand(1);

  Ctx ctx;
  std::string config_path;
  auto* seed_opt =
      app.add_option("--seed", ctx.seed, "Random seed (default 1)");
  auto* config_opt = app.add_option("--config", config_path,
                                    "JSON config file; flags override it");
  auto* out_opt = app.add_option("--out-dir", ctx.out_dir,
                                 "Directory for report files (default .)");
  auto* format_opt =
      app.add_option("--format", ctx.format, "Console output format")
          ->check(CLI::IsMember({"json", "csv"}));

  AuditArgs audit_args;
  auto* audit_cmd = app.add_subcommand(
      "audit", "Core/tail/coverage audit of one interaction graph");
  audit_cmd->fallthrough();
  add_input_options(audit_cmd, audit_args.in);
  audit_args.ranks_opt =
      audit_cmd
          ->add_option("--ranks", audit_args.ranks,
                       "Test ranks to evaluate (default 8,10,20,50,100)")
          ->delimiter(',');
  audit_args.group_opt = audit_cmd->add_option(
      "--group-attribute", audit_args.group_attribute,
      "Left-side metadata attribute for per-group curves");
  audit_args.xl_opt = audit_cmd->add_option(
      "--x-min-left", audit_args.x_min_left,
      "Fix the left tail threshold instead of scanning");
  audit_args.xr_opt = audit_cmd->add_option(
      "--x-min-right", audit_args.x_min_right,
      "Fix the right tail threshold instead of scanning");

  WorldsArgs worlds_args;
  auto* worlds_cmd = app.add_subcommand(
      "worlds", "Generate a possible-world ensemble and disagreement stats");
  worlds_cmd->fallthrough();
  add_input_options(worlds_cmd, worlds_args.in);
  worlds_args.k_opt = worlds_cmd->add_option("--rank-k", worlds_args.rank_k,
                                             "Completion rank (default 50)");
  worlds_args.p_opt = worlds_cmd->add_option("--worlds", worlds_args.p,
                                             "Ensemble size (default 100)");
  worlds_args.ft_opt = worlds_cmd->add_option(
      "--fit-tol", worlds_args.fit_tol, "Observed-entry RMS tolerance");
  worlds_args.rt_opt = worlds_cmd->add_option(
      "--rank-tol", worlds_args.rank_tol, "Relative rank-residual tolerance");
  worlds_args.mi_opt = worlds_cmd->add_option(
      "--max-iters", worlds_args.max_iters, "Repulsion iterations per world");
  worlds_args.pi_opt = worlds_cmd->add_option("--polish-iters",
                                              worlds_args.polish_iters,
                                              "Constraint-restoring iterations");
  worlds_args.ns_opt = worlds_cmd->add_flag(
      "--no-stats", worlds_args.no_stats,
      "Skip disagreement statistics (allows --worlds 1)");

  SimulateArgs sim_args;
  auto* sim_cmd = app.add_subcommand(
      "simulate", "Scaling-bound tables and sampling-cost simulations");
  sim_cmd->fallthrough();
  sim_args.a_opt =
      sim_cmd->add_option("--alpha", sim_args.alpha, "Tail index for bounds");
  sim_args.x_opt =
      sim_cmd->add_option("--x-min", sim_args.x_min, "Tail threshold");
  sim_args.n_opt = sim_cmd->add_option("--population", sim_args.population,
                                       "Population size |X|");
  sim_args.t_opt = sim_cmd->add_option(
      "--threshold", sim_args.threshold,
      "Benchmark degree threshold (adds benchmark_cost column)");
  sim_args.sp_opt = sim_cmd->add_option("--success-prob",
                                        sim_args.success_prob,
                                        "Per-draw success probability");
  sim_args.ds_opt = sim_cmd->add_option("--domain-size", sim_args.domain_size,
                                        "Coverage growth: number of nodes");
  sim_args.rk_opt = sim_cmd->add_option(
      "--rank-k", sim_args.rank_k, "Coverage growth: hits needed per node");
  sim_args.md_opt = sim_cmd->add_option(
      "--max-draws", sim_args.max_draws, "Coverage growth: draw budget");
  sim_args.cp_opt = sim_cmd->add_option(
      "--curve-points", sim_args.curve_points, "Coverage growth: curve points");
  sim_args.tr_opt = sim_cmd->add_option("--trials", sim_args.trials,
                                        "Simulation repetitions to average");
  sim_args.w_opt =
      sim_cmd
          ->add_option("--weights", sim_args.weights,
                       "Coverage growth weight law")
          ->check(CLI::IsMember({"pareto", "uniform"}));

  FitTailArgs fit_args;
  auto* fit_cmd = app.add_subcommand(
      "fit-tail", "Pareto tail fit of a degree sequence or value file");
  fit_cmd->fallthrough();
  add_input_options(fit_cmd, fit_args.in);
  fit_args.v_opt = fit_cmd->add_option(
      "--values", fit_args.values_path,
      "Plain file with one value per line (instead of a graph input)");
  fit_args.s_opt = fit_cmd->add_option(
      "--side", fit_args.side, "Graph side to fit: left or right");
  fit_args.x_opt = fit_cmd->add_option(
      "--x-min", fit_args.x_min, "Fix the tail threshold instead of scanning");
  fit_args.r_opt =
      fit_cmd
          ->add_option("--ranks", fit_args.ranks,
                       "Also report analytic coverage at these ranks")
          ->delimiter(',');

  VerdictArgs verdict_args;
  auto* verdict_cmd = app.add_subcommand(
      "verdict", "Per-node validity verdicts at an assumed test rank");
  verdict_cmd->fallthrough();
  add_input_options(verdict_cmd, verdict_args.in);
  verdict_args.r_opt = verdict_cmd->add_option("--rank", verdict_args.rank,
                                               "Assumed test rank (required)");
  verdict_args.g_opt = verdict_cmd->add_option(
      "--group-attribute", verdict_args.group_attribute,
      "Left-side metadata attribute for per-group fractions");

  try {
    app.parse(argc, argv);

    if (config_opt->count() > 0) ctx.config = load_config_file(config_path);
    ctx.seed = resolve(seed_opt, ctx.seed, ctx.config, "seed");
    ctx.out_dir = resolve(out_opt, ctx.out_dir, ctx.config, "out_dir");
    ctx.format = resolve(format_opt, ctx.format, ctx.config, "format");
    if (ctx.format != "json" && ctx.format != "csv")
      throw std::invalid_argument("format must be 'json' or 'csv'");
    ctx.resolved["seed"] = ctx.seed;
    ctx.resolved["out_dir"] = ctx.out_dir;
    ctx.resolved["format"] = ctx.format;

    if (audit_cmd->parsed()) return cmd_audit(audit_args, ctx);
    if (worlds_cmd->parsed()) return cmd_worlds(worlds_args, ctx);
    if (sim_cmd->parsed()) return cmd_simulate(sim_args, ctx);
    if (fit_cmd->parsed()) return cmd_fit_tail(fit_args, ctx);
    if (verdict_cmd->parsed()) return cmd_verdict(verdict_args, ctx);
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
}
