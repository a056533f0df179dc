#include "tvaudit/risk.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tvaudit {

// ---- losses -----------------------------------------------------------------

const char* loss_name(LossKind kind) {
  switch (kind) {
    case LossKind::Squared: return "squared";
    case LossKind::LogLoss: return "log_loss";
    case LossKind::Kl: return "kl";
    case LossKind::ItakuraSaito: return "itakura_saito";
  }
  return "?";
}

namespace {

[[noreturn]] void loss_domain_fail(LossKind kind, const char* requirement) {
  throw std::domain_error(std::string(loss_name(kind)) +
                          " loss domain violated: requires " + requirement);
}

}  // namespace

double loss(LossKind kind, double x, double y) {
  switch (kind) {
    case LossKind::Squared:
      return (x - y) * (x - y);
    case LossKind::LogLoss:
      if (!(x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0))
        loss_domain_fail(kind, "x, y in (0, 1)");
      return x * std::log(x / y) + (1.0 - x) * std::log((1.0 - x) / (1.0 - y));
    case LossKind::Kl:
      if (!(x >= 0.0 && y > 0.0)) loss_domain_fail(kind, "x >= 0 and y > 0");
      if (x == 0.0) return y;
      return x * std::log(x / y) - x + y;
    case LossKind::ItakuraSaito:
      if (!(x > 0.0 && y > 0.0)) loss_domain_fail(kind, "x, y > 0");
      return x / y - std::log(x / y) - 1.0;
  }
  throw std::invalid_argument("unknown loss kind");
}

// ---- risks ------------------------------------------------------------------

double true_risk(const Eigen::MatrixXd& f, const Eigen::MatrixXd& h,
                 const Eigen::MatrixXd& target_weights, LossKind kind) {
  if (f.rows() != h.rows() || f.cols() != h.cols())
    throw std::invalid_argument("risk: f and h shapes differ");
  if (target_weights.rows() != f.rows() || target_weights.cols() != f.cols())
    throw std::invalid_argument("risk: weight shape differs from f");
  double total = 0.0;
  for (int j = 0; j < f.cols(); ++j)
    for (int i = 0; i < f.rows(); ++i) {
      if (target_weights(i, j) < 0.0)
        throw std::invalid_argument("risk: negative target weight");
      total += target_weights(i, j);
    }
  if (!(total > 0.0))
    throw std::invalid_argument("risk: target weights sum to zero");
  double risk = 0.0;
  for (int j = 0; j < f.cols(); ++j)
    for (int i = 0; i < f.rows(); ++i) {
      double w = target_weights(i, j);
      if (w > 0.0) risk += w * loss(kind, h(i, j), f(i, j));
    }
  return risk / total;
}

double true_risk(const Eigen::MatrixXd& f, const Eigen::MatrixXd& h,
                 LossKind kind) {
  return true_risk(
      f, h, Eigen::MatrixXd::Ones(f.rows(), f.cols()), kind);
}

const char* estimator_name(Estimator estimator) {
  switch (estimator) {
    case Estimator::MonteCarlo: return "monte_carlo";
    case Estimator::HorvitzThompson: return "horvitz_thompson";
    case Estimator::EmpiricalRisk: return "empirical_risk";
    case Estimator::HtWeightedEmpiricalRisk: return "ht_weighted_empirical_risk";
  }
  return "?";
}

RiskEstimate estimate_risk(Estimator estimator,
                           const std::vector<EntrySample>& samples,
                           const std::vector<double>& weights, LossKind kind) {
  if (samples.empty())
    throw std::invalid_argument("risk estimation needs at least one sample");
  const bool ht = estimator == Estimator::HorvitzThompson ||
                  estimator == Estimator::HtWeightedEmpiricalRisk;
  if (ht) {
    if (weights.size() != samples.size())
      throw std::invalid_argument(
          std::string(estimator_name(estimator)) +
          " needs one weight per sample");
    for (double w : weights)
      if (!(w > 0.0))
        throw std::invalid_argument(
            std::string(estimator_name(estimator)) +
            " is undefined for non-positive weights");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double term = 0.0;
    switch (estimator) {
      case Estimator::MonteCarlo:
        term = samples[i].f_val;
        break;
      case Estimator::HorvitzThompson:
        term = samples[i].f_val / weights[i];
        break;
      case Estimator::EmpiricalRisk:
        term = loss(kind, samples[i].h_val, samples[i].f_val);
        break;
      case Estimator::HtWeightedEmpiricalRisk:
        term = loss(kind, samples[i].h_val, samples[i].f_val) / weights[i];
        break;
    }
    sum += term;
  }
  RiskEstimate est;
  est.value = sum / static_cast<double>(samples.size());
  est.estimator = estimator;
  est.sample_size = samples.size();
  est.kind = kind;
  return est;
}

RiskEstimate estimate_risk(Estimator estimator,
                           const std::vector<EntrySample>& samples,
                           LossKind kind) {
  if (estimator == Estimator::HorvitzThompson ||
      estimator == Estimator::HtWeightedEmpiricalRisk)
    throw std::invalid_argument(std::string(estimator_name(estimator)) +
                                " requires per-sample weights");
  return estimate_risk(estimator, samples, {}, kind);
}

// ---- isomerism --------------------------------------------------------------

namespace {

int numeric_rank(const Eigen::MatrixXd& a, double rank_scale) {
  if (a.rows() == 0 || a.cols() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  const double cut = static_cast<double>(std::max(a.rows(), a.cols())) *
                     std::numeric_limits<double>::epsilon() * sv(0) *
                     rank_scale;
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cut) ++r;
  return r;
}

}  // namespace

bool is_isomeric(const Eigen::MatrixXd& f,
                 const std::vector<std::vector<bool>>& observed,
                 double rank_scale) {
  const int m = static_cast<int>(f.rows()), n = static_cast<int>(f.cols());
  if (static_cast<int>(observed.size()) != m)
    throw std::invalid_argument("mask row count differs from matrix");
  for (const auto& row : observed)
    if (static_cast<int>(row.size()) != n)
      throw std::invalid_argument("mask column count differs from matrix");
  for (int j = 0; j < n; ++j) {
    bool any = false;
    for (int i = 0; i < m && !any; ++i) any = observed[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    if (!any)
      throw std::invalid_argument("column " + std::to_string(j) +
                                  " has no observations");
  }

  const int full_rank = numeric_rank(f, rank_scale);
  // Row restrictions: all rows, only the columns observed in row i.
  for (int i = 0; i < m; ++i) {
    std::vector<int> cols;
    for (int j = 0; j < n; ++j)
      if (observed[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)])
        cols.push_back(j);
    Eigen::MatrixXd sub(m, static_cast<int>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c)
      sub.col(static_cast<int>(c)) = f.col(cols[c]);
    if (numeric_rank(sub, rank_scale) != full_rank) return false;
  }
  // Column restrictions: all columns, only the rows observed in column j.
  for (int j = 0; j < n; ++j) {
    std::vector<int> rows;
    for (int i = 0; i < m; ++i)
      if (observed[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)])
        rows.push_back(i);
    Eigen::MatrixXd sub(static_cast<int>(rows.size()), n);
    for (std::size_t r = 0; r < rows.size(); ++r)
      sub.row(static_cast<int>(r)) = f.row(rows[r]);
    if (numeric_rank(sub, rank_scale) != full_rank) return false;
  }
  return true;
}

// ---- verdicts ---------------------------------------------------------------

ValidityVerdict validity_verdict(const CoreDecomposition& cd,
                                 int rank_assumed) {
  if (rank_assumed < 1)
    throw std::invalid_argument("rank_assumed must be >= 1");
  ValidityVerdict v;
  v.rank_assumed = rank_assumed;
  auto mark = [&](const std::vector<int>& cores, std::vector<Verdict>& out,
                  double& fraction) {
    out.reserve(cores.size());
    std::size_t possible = 0;
    for (int c : cores) {
      bool ok = c >= rank_assumed;
      out.push_back(ok ? Verdict::ValidPossible : Verdict::Invalid);
      if (ok) ++possible;
    }
    fraction = cores.empty() ? 0.0
                             : static_cast<double>(possible) /
                                   static_cast<double>(cores.size());
  };
  mark(cd.left_core, v.left, v.left_possible_fraction);
  mark(cd.right_core, v.right, v.right_possible_fraction);
  return v;
}

ValidityVerdict validity_verdict(const SampleGraph& g,
                                 const CoreDecomposition& cd, int rank_assumed,
                                 Side group_side,
                                 const std::string& attribute) {
  ValidityVerdict v = validity_verdict(cd, rank_assumed);
  const int n = group_side == Side::Left ? g.left_count() : g.right_count();
  std::map<std::string, std::pair<std::size_t, std::size_t>> tally;
  for (int i = 0; i < n; ++i) {
    const MetaRecord* meta = g.meta(group_side, i);
    if (!meta) continue;
    auto it = meta->find(attribute);
    if (it == meta->end()) continue;
    auto& [possible, total] = tally[it->second];
    ++total;
    if (cd.core(group_side, i) >= rank_assumed) ++possible;
  }
  for (const auto& [group, counts] : tally)
    v.group_possible_fraction[group] =
        static_cast<double>(counts.first) / static_cast<double>(counts.second);
  return v;
}

// ---- concentration helpers --------------------------------------------------

double hoeffding_bound(std::size_t m, double delta) {
  if (m < 1) throw std::invalid_argument("sample count must be >= 1");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::domain_error("delta must lie in (0, 1)");
  return std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(m)));
}

double markov_lower_bound(double epsilon, double prob_exceed) {
  if (epsilon < 0.0) throw std::domain_error("epsilon must be >= 0");
  if (!(prob_exceed >= 0.0 && prob_exceed <= 1.0))
    throw std::domain_error("prob_exceed must lie in [0, 1]");
  return epsilon * prob_exceed;
}

// ---- Bregman projection -----------------------------------------------------

namespace {

// d/dx of loss(kind, x, h): generator gradient difference.
double loss_grad_x(LossKind kind, double x, double h) {
  switch (kind) {
    case LossKind::Squared: return 2.0 * (x - h);
    case LossKind::LogLoss:
      return std::log(x / h) - std::log((1.0 - x) / (1.0 - h));
    case LossKind::Kl: return std::log(x / h);
    case LossKind::ItakuraSaito: return 1.0 / h - 1.0 / x;
  }
  throw std::invalid_argument("unknown loss kind");
}

bool in_domain(LossKind kind, double x) {
  switch (kind) {
    case LossKind::Squared: return true;
    case LossKind::LogLoss: return x > 0.0 && x < 1.0;
    case LossKind::Kl:
    case LossKind::ItakuraSaito: return x > 0.0;
  }
  return false;
}

}  // namespace

PythagoreanResult pythagorean_check(const Eigen::VectorXd& f,
                                    const Eigen::VectorXd& h,
                                    const Eigen::MatrixXd& basis, LossKind kind,
                                    double y_min, double y_max,
                                    double tolerance) {
  const auto d = f.size();
  if (h.size() != d) throw std::invalid_argument("f and h sizes differ");
  if (basis.rows() != d)
    throw std::invalid_argument("basis row count differs from f");
  auto feasible = [&](const Eigen::VectorXd& x) {
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (x(i) < y_min || x(i) > y_max || !in_domain(kind, x(i))) return false;
    return true;
  };
  if (!feasible(f) || !feasible(h))
    throw std::domain_error("f and h must lie inside the box and the " +
                            std::string(loss_name(kind)) + " domain");

  // Minimize sum_i loss(kind, (f + basis z)_i, h_i) over z by gradient
  // descent; steps shrink until the iterate stays inside the box and domain.
  auto divergence = [&](const Eigen::VectorXd& x) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) s += loss(kind, x(i), h(i));
    return s;
  };
  Eigen::VectorXd z = Eigen::VectorXd::Zero(basis.cols());
  Eigen::VectorXd x = f;
  double value = divergence(x);
  double eta = 0.25;
  bool converged = false;
  for (int it = 0; it < 20000; ++it) {
    Eigen::VectorXd gx(d);
    for (Eigen::Index i = 0; i < d; ++i) gx(i) = loss_grad_x(kind, x(i), h(i));
    Eigen::VectorXd gz = basis.transpose() * gx;
    if (gz.norm() <= 1e-12 * (1.0 + std::abs(value))) {
      converged = true;
      break;
    }
    bool stepped = false;
    while (eta > 1e-14) {
      Eigen::VectorXd z_try = z - eta * gz;
      Eigen::VectorXd x_try = f + basis * z_try;
      if (feasible(x_try)) {
        double v_try = divergence(x_try);
        if (v_try < value - 1e-15) {
          z = std::move(z_try);
          x = std::move(x_try);
          value = v_try;
          eta = std::min(eta * 1.5, 1e6);
          stepped = true;
          break;
        }
      }
      eta *= 0.5;
    }
    if (!stepped) {
      converged = true;  // no feasible descent direction left
      break;
    }
  }
  if (!converged)
    throw std::runtime_error("Bregman projection did not converge");

  PythagoreanResult result;
  result.projection = x;
  for (Eigen::Index i = 0; i < d; ++i) {
    result.lhs += loss(kind, f(i), x(i));
    result.rhs += loss(kind, f(i), h(i));
  }
  result.holds = result.lhs <= result.rhs + tolerance;
  return result;
}

}  // namespace tvaudit
