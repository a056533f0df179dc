#include "tvaudit/worlds.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace tvaudit {

// ---- masks ------------------------------------------------------------------

std::vector<std::int64_t> ObservedMask::unobserved_indices() const {
  std::vector<std::uint8_t> seen(
      static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), 0);
  for (std::size_t i = 0; i < value.size(); ++i)
    seen[static_cast<std::size_t>(row_idx[i]) * static_cast<std::size_t>(cols) +
         static_cast<std::size_t>(col_idx[i])] = 1;
  std::vector<std::int64_t> out;
  out.reserve(seen.size() - value.size());
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (!seen[i]) out.push_back(static_cast<std::int64_t>(i));
  return out;
}

ObservedMask observed_mask(const SampleGraph& g) {
  ObservedMask mask;
  mask.rows = g.left_count();
  mask.cols = g.right_count();
  mask.y_min = g.y_min();
  mask.y_max = g.y_max();
  mask.row_idx.reserve(g.edges().size());
  mask.col_idx.reserve(g.edges().size());
  mask.value.reserve(g.edges().size());
  for (const Edge& e : g.edges()) {
    mask.row_idx.push_back(e.left);
    mask.col_idx.push_back(e.right);
    mask.value.push_back(e.label);
  }
  return mask;
}

namespace {

void check_mask(const ObservedMask& mask) {
  if (mask.rows <= 0 || mask.cols <= 0)
    throw std::invalid_argument("mask must span a nonempty matrix");
  if (!(mask.y_min < mask.y_max))
    throw std::invalid_argument("mask label range must be nonempty");
  for (std::size_t i = 0; i < mask.value.size(); ++i) {
    if (mask.row_idx[i] < 0 || mask.row_idx[i] >= mask.rows ||
        mask.col_idx[i] < 0 || mask.col_idx[i] >= mask.cols)
      throw std::invalid_argument("mask entry references out-of-range index");
    if (mask.value[i] < mask.y_min || mask.value[i] > mask.y_max)
      throw std::domain_error("observed value outside the label range");
  }
}

double observed_rms(const ObservedMask& mask, const Eigen::MatrixXd& u,
                    const Eigen::MatrixXd& v) {
  if (mask.value.empty()) return 0.0;
  double sq = 0.0;
  for (std::size_t i = 0; i < mask.value.size(); ++i) {
    double pred = u.row(mask.row_idx[i]).dot(v.row(mask.col_idx[i]));
    double d = pred - mask.value[i];
    sq += d * d;
  }
  return std::sqrt(sq / static_cast<double>(mask.value.size()));
}

}  // namespace

// ---- base factorization -----------------------------------------------------

FactorizationResult fit_base_factorization(const ObservedMask& mask, int rank_k,
                                           std::uint64_t seed, int max_iters,
                                           double fit_tol) {
  check_mask(mask);
  if (rank_k < 1) throw std::invalid_argument("rank_k must be >= 1");
  if (mask.value.empty())
    throw std::invalid_argument("factorization needs at least one observation");

  const int m = mask.rows, n = mask.cols, k = rank_k;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double scale =
      std::sqrt(std::max(1.0, std::abs(mask.y_max)) / std::sqrt(double(k)));
  Eigen::MatrixXd u(m, k), v(n, k);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < k; ++j) u(i, j) = gauss(rng) * scale;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j) v(i, j) = gauss(rng) * scale;

  // Observation lists per row and per column.
  std::vector<std::vector<std::pair<int, double>>> by_row(
      static_cast<std::size_t>(m)),
      by_col(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < mask.value.size(); ++i) {
    by_row[static_cast<std::size_t>(mask.row_idx[i])].push_back(
        {mask.col_idx[i], mask.value[i]});
    by_col[static_cast<std::size_t>(mask.col_idx[i])].push_back(
        {mask.row_idx[i], mask.value[i]});
  }

  // Box-anchored alternating least squares. Each row solve fits the observed
  // labels plus a weak proximal pull toward the previous iterate's box-clipped
  // predictions. The pull vanishes at any fixed point whose predictions lie in
  // the box, so well-observed rows still interpolate; rows with few
  // observations can no longer run away from the label range, which would
  // otherwise poison the shared column space with directions no in-box matrix
  // can use. The ridge is relative to the Gram trace, so it stabilizes
  // underdetermined rows without stopping the overdetermined ones from
  // interpolating.
  const double anchor = 1e-2;
  auto solve_side = [&](Eigen::MatrixXd& target, const Eigen::MatrixXd& other,
                        const auto& obs) {
    const Eigen::MatrixXd gram_all = other.transpose() * other;
    const Eigen::MatrixXd prev = target;
    Eigen::MatrixXd gram(k, k);
    Eigen::VectorXd rhs(k);
    for (std::size_t idx = 0; idx < obs.size(); ++idx) {
      Eigen::VectorXd pred = other * prev.row(static_cast<int>(idx)).transpose();
      pred = pred.cwiseMax(mask.y_min).cwiseMin(mask.y_max);
      gram = anchor * gram_all;
      rhs.noalias() = anchor * (other.transpose() * pred);
      for (const auto& [j, y] : obs[idx]) {
        const auto row = other.row(j);
        gram.noalias() += row.transpose() * row;
        rhs.noalias() += y * row.transpose();
      }
      const double ridge =
          1e-10 * gram.trace() / static_cast<double>(k) + 1e-12;
      gram.diagonal().array() += ridge;
      target.row(static_cast<int>(idx)) =
          gram.ldlt().solve(rhs).transpose();
    }
  };

  FactorizationResult result;
  double prev_rms = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iters; ++it) {
    solve_side(u, v, by_row);
    solve_side(v, u, by_col);
    result.iterations = it + 1;
    result.rms = observed_rms(mask, u, v);
    // Keep refining well below the target while progress lasts; Q benefits
    // from the extra precision.
    if (result.rms <= 0.01 * fit_tol) break;
    if (prev_rms - result.rms < 1e-9 * std::max(1.0, prev_rms)) break;
    prev_rms = result.rms;
  }
  result.U = std::move(u);
  result.V = std::move(v);
  result.converged = result.rms <= fit_tol;
  return result;
}

FactorizationResult fit_base_factorization(const SampleGraph& g, int rank_k,
                                           std::uint64_t seed, int max_iters,
                                           double fit_tol) {
  if (g.edges().empty())
    throw std::invalid_argument("factorization needs a nonempty graph");
  return fit_base_factorization(observed_mask(g), rank_k, seed, max_iters,
                                fit_tol);
}

// ---- subspace ---------------------------------------------------------------

Eigen::MatrixXd orthonormal_subspace(const Eigen::MatrixXd& u) {
  if (u.rows() < u.cols())
    throw std::invalid_argument("subspace basis has more columns than rows");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(u);
  const auto rank = qr.rank();
  if (rank < u.cols())
    throw std::invalid_argument(
        "subspace basis is rank-deficient: " +
        std::to_string(u.cols() - rank) + " of " + std::to_string(u.cols()) +
        " columns are linearly dependent");
  Eigen::MatrixXd q = qr.householderQ() *
                      Eigen::MatrixXd::Identity(u.rows(), u.cols());
  return q;
}

// ---- world generation -------------------------------------------------------

namespace {

struct Objective {
  double total = 0.0;
  double sub_sq = 0.0;  // ||X - Q Q^T X||_F^2
  double fit_sq = 0.0;  // sum over observed of (X - Y)^2
};

class WorldProblem {
 public:
  WorldProblem(const ObservedMask& mask, const Eigen::MatrixXd& q,
               const std::vector<const Eigen::MatrixXd*>& priors,
               const WorldGenConfig& cfg)
      : mask_(mask), q_(q), cfg_(cfg), p_(static_cast<double>(priors.size())) {
    if (!priors.empty()) {
      prior_sum_ = Eigen::MatrixXd::Zero(mask.rows, mask.cols);
      prior_sq_ = 0.0;
      for (const auto* w : priors) {
        prior_sum_ += *w;
        prior_sq_ += w->squaredNorm();
      }
    }
  }

  // Objective and residual-against-span in one pass; `r` is reused for the
  // gradient at the same point.
  Objective eval(const Eigen::MatrixXd& x, double lambda_div,
                 Eigen::MatrixXd& r) const {
    Objective o;
    r.noalias() = x - q_ * (q_.transpose() * x);
    o.sub_sq = r.squaredNorm();
    for (std::size_t i = 0; i < mask_.value.size(); ++i) {
      double d = x(mask_.row_idx[i], mask_.col_idx[i]) - mask_.value[i];
      o.fit_sq += d * d;
    }
    o.total = cfg_.lambda_sub * o.sub_sq + cfg_.lambda_fit * o.fit_sq;
    if (p_ > 0.0 && lambda_div > 0.0) {
      double div = p_ * x.squaredNorm() - 2.0 * x.cwiseProduct(prior_sum_).sum() +
                   prior_sq_;
      o.total -= lambda_div * div;
    }
    return o;
  }

  Eigen::MatrixXd gradient(const Eigen::MatrixXd& x, const Eigen::MatrixXd& r,
                           double lambda_div) const {
    Eigen::MatrixXd g = (2.0 * cfg_.lambda_sub) * r;
    for (std::size_t i = 0; i < mask_.value.size(); ++i) {
      double d = x(mask_.row_idx[i], mask_.col_idx[i]) - mask_.value[i];
      g(mask_.row_idx[i], mask_.col_idx[i]) += 2.0 * cfg_.lambda_fit * d;
    }
    if (p_ > 0.0 && lambda_div > 0.0)
      g.noalias() -= (2.0 * lambda_div) * (p_ * x - prior_sum_);
    return g;
  }

  Eigen::MatrixXd clip(Eigen::MatrixXd x) const {
    return x.cwiseMax(mask_.y_min).cwiseMin(mask_.y_max);
  }

  double fit_rms(double fit_sq) const {
    return mask_.value.empty()
               ? 0.0
               : std::sqrt(fit_sq / static_cast<double>(mask_.value.size()));
  }

 private:
  const ObservedMask& mask_;
  const Eigen::MatrixXd& q_;
  const WorldGenConfig& cfg_;
  double p_;
  Eigen::MatrixXd prior_sum_;
  double prior_sq_ = 0.0;
};

}  // namespace

World generate_world(const WorldEnsemble& ensemble_so_far,
                     const ObservedMask& mask, const Eigen::MatrixXd& q,
                     std::uint64_t seed, const WorldGenConfig& cfg) {
  check_mask(mask);
  if (q.rows() != mask.rows)
    throw std::invalid_argument("subspace basis rows must match mask rows");
  if (q.cols() < 1 || q.cols() > q.rows())
    throw std::invalid_argument("subspace basis has invalid column count");
  if (((q.transpose() * q) -
       Eigen::MatrixXd::Identity(q.cols(), q.cols()))
          .cwiseAbs()
          .maxCoeff() > 1e-8)
    throw std::invalid_argument("subspace basis is not orthonormal");
  if (cfg.lambda_sub <= 0.0 || cfg.lambda_fit <= 0.0 || cfg.lambda_div <= 0.0)
    throw std::invalid_argument("objective weights must be positive");
  std::vector<const Eigen::MatrixXd*> priors;
  for (const World& w : ensemble_so_far.worlds) {
    if (w.matrix.rows() != mask.rows || w.matrix.cols() != mask.cols)
      throw std::invalid_argument("prior world shape does not match the mask");
    priors.push_back(&w.matrix);
  }

  WorldProblem problem(mask, q, priors, cfg);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(mask.y_min, mask.y_max);

  Eigen::MatrixXd x(mask.rows, mask.cols);
  for (int j = 0; j < mask.cols; ++j)
    for (int i = 0; i < mask.rows; ++i) x(i, j) = unif(rng);
  x = problem.clip(q * (q.transpose() * x));

  World world;
  world.rank_bound = static_cast<int>(q.cols());
  int iters = 0;

  // Phase 1: repel from the prior worlds under the full objective. The
  // repulsion weight starts at cfg.lambda_div and is halved whenever no step
  // size keeps the clipped objective decreasing.
  {
    double lambda_div = priors.empty() ? 0.0 : cfg.lambda_div;
    const double lip = 2.0 * (cfg.lambda_sub + cfg.lambda_fit);
    double eta = 0.9 / lip;
    const double eta_min = 1e-6 / lip, eta_max = 64.0 / lip;
    Eigen::MatrixXd r(mask.rows, mask.cols), r_trial(mask.rows, mask.cols);
    Objective cur = problem.eval(x, lambda_div, r);
    for (int it = 0; it < cfg.max_iters; ++it, ++iters) {
      Eigen::MatrixXd g = problem.gradient(x, r, lambda_div);
      Eigen::MatrixXd trial = problem.clip(x - eta * g);
      Objective next = problem.eval(trial, lambda_div, r_trial);
      if (next.total < cur.total - 1e-12 * (1.0 + std::abs(cur.total))) {
        x.swap(trial);
        r.swap(r_trial);
        cur = next;
        eta = std::min(eta * 1.25, eta_max);
        continue;
      }
      eta *= 0.5;
      if (eta >= eta_min) continue;
      if (lambda_div > 1e-4 * cfg.lambda_div) {
        lambda_div *= 0.5;
        eta = 0.9 / lip;
        cur = problem.eval(x, lambda_div, r);  // objective changed with lambda
        continue;
      }
      break;  // stationary even without repulsion
    }
  }

  // Phase 2: pin the observed entries onto their labels, then walk the free
  // entries toward the shared column space until the rank residual is inside
  // safety*rank_tol. Stopping on that shell instead of at the constrained
  // minimizer is what keeps the worlds apart: each one approaches the common
  // optimum from its own repulsion endpoint and halts on a different side.
  // Pinning first also means the later pull can never trade label fidelity
  // for subspace fidelity.
  {
    auto pin = [&](Eigen::MatrixXd& m) {
      for (std::size_t i = 0; i < mask.value.size(); ++i)
        m(mask.row_idx[i], mask.col_idx[i]) = mask.value[i];
    };
    pin(x);
    const double eta = 0.9 / (2.0 * cfg.lambda_sub);
    Eigen::MatrixXd r(mask.rows, mask.cols);
    double last_rank_res = std::numeric_limits<double>::infinity();
    int stalled = 0;
    for (int it = 0; it < cfg.polish_iters; ++it, ++iters) {
      Objective o = problem.eval(x, 0.0, r);
      const double norm = std::max(x.norm(), 1e-12);
      const double rank_res = std::sqrt(o.sub_sq) / norm;
      if (rank_res <= cfg.safety * cfg.rank_tol) break;
      if (rank_res > last_rank_res - 1e-14) {
        if (++stalled > 50) {
          world.note = "rank pull stalled at " + std::to_string(rank_res);
          break;
        }
      } else {
        stalled = 0;
      }
      last_rank_res = rank_res;
      x -= eta * (2.0 * cfg.lambda_sub) * r;
      pin(x);
      x = problem.clip(x);  // labels lie in the box, so the pin survives
    }
  }

  // Phase 3: re-assert the labels so the emitted matrix reproduces every
  // observation exactly even when the polish loop exited early.
  for (std::size_t i = 0; i < mask.value.size(); ++i)
    x(mask.row_idx[i], mask.col_idx[i]) = mask.value[i];

  Eigen::MatrixXd r(mask.rows, mask.cols);
  Objective final_o = problem.eval(x, 0.0, r);
  world.matrix = std::move(x);
  world.fit_residual = problem.fit_rms(final_o.fit_sq);
  world.rank_residual =
      std::sqrt(final_o.sub_sq) / std::max(world.matrix.norm(), 1e-12);
  world.iterations = iters;
  world.accepted = world.fit_residual <= cfg.fit_tol &&
                   world.rank_residual <= cfg.rank_tol;
  if (!world.accepted && world.note.empty())
    world.note = "tolerances violated: fit_residual=" +
                 std::to_string(world.fit_residual) +
                 " rank_residual=" + std::to_string(world.rank_residual);
  return world;
}

WorldEnsemble generate_ensemble(const ObservedMask& mask, int rank_k, int p,
                                std::uint64_t seed,
                                const WorldGenConfig& cfg) {
  if (p < 1) throw std::invalid_argument("ensemble size must be >= 1");
  FactorizationResult base =
      fit_base_factorization(mask, rank_k, seed, 600, cfg.fit_tol);
  WorldEnsemble ensemble;
  ensemble.mask = mask;
  ensemble.fit_tol = cfg.fit_tol;
  ensemble.rank_tol = cfg.rank_tol;
  ensemble.subspace_q = orthonormal_subspace(base.U);
  for (int w = 0; w < p; ++w) {
    std::uint64_t world_seed =
        seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(w + 1));
    ensemble.worlds.push_back(generate_world(ensemble, ensemble.mask,
                                             ensemble.subspace_q, world_seed,
                                             cfg));
  }
  return ensemble;
}

// ---- disagreement -----------------------------------------------------------

double nae(double a, double b, double y_min, double y_max) {
  if (!(y_max > y_min))
    throw std::invalid_argument("label range must be nonempty");
  if (a < y_min || a > y_max || b < y_min || b > y_max)
    throw std::domain_error("values outside the label range");
  return std::abs(a - b) / (y_max - y_min);
}

DisagreementStats disagreement_stats(const WorldEnsemble& ensemble,
                                     const DisagreementOptions& options) {
  const std::size_t p = ensemble.worlds.size();
  if (p < 2)
    throw std::invalid_argument("disagreement needs at least two worlds");
  const ObservedMask& mask = ensemble.mask;
  const double range = mask.y_max - mask.y_min;
  if (!(range > 0.0))
    throw std::invalid_argument("label range must be nonempty");

  // Column-major linear indices of unobserved entries, matching Eigen's
  // default storage so the pair sweeps stay sequential in memory.
  std::vector<std::uint8_t> observed(
      static_cast<std::size_t>(mask.rows) * static_cast<std::size_t>(mask.cols),
      0);
  for (std::size_t i = 0; i < mask.value.size(); ++i)
    observed[static_cast<std::size_t>(mask.col_idx[i]) *
                 static_cast<std::size_t>(mask.rows) +
             static_cast<std::size_t>(mask.row_idx[i])] = 1;
  std::vector<std::int64_t> unobserved;
  unobserved.reserve(observed.size() - mask.value.size());
  for (std::size_t i = 0; i < observed.size(); ++i)
    if (!observed[i]) unobserved.push_back(static_cast<std::int64_t>(i));

  DisagreementStats stats;
  stats.unobserved_count = unobserved.size();
  if (unobserved.empty())
    throw std::invalid_argument(
        "no unobserved entries: disagreement is defined over the unobserved "
        "part of the matrix");

  const std::size_t n_pairs = p * (p - 1) / 2;
  const bool exact = n_pairs * unobserved.size() <= options.exact_limit;

  double min_rms = std::numeric_limits<double>::infinity();
  std::vector<double> buffer;
  std::vector<std::size_t> counts;
  for (std::size_t a = 0; a < p; ++a) {
    const double* da = ensemble.worlds[a].matrix.data();
    for (std::size_t b = a + 1; b < p; ++b) {
      const double* db = ensemble.worlds[b].matrix.data();
      double sum = 0.0, comp = 0.0, sq = 0.0;
      if (exact) {
        buffer.clear();
      } else {
        counts.assign(static_cast<std::size_t>(options.bins), 0);
      }
      for (std::int64_t idx : unobserved) {
        double d = da[idx] - db[idx];
        sq += d * d;
        double e = std::abs(d) / range;
        double y = e - comp;  // Kahan: the identity with the area is exact
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if (exact) {
          buffer.push_back(e);
        } else {
          auto cell = static_cast<long>(e * options.bins);
          cell = std::clamp(cell, 0L, static_cast<long>(options.bins - 1));
          ++counts[static_cast<std::size_t>(cell)];
        }
      }
      PairDisagreement pd;
      pd.world_a = static_cast<int>(a);
      pd.world_b = static_cast<int>(b);
      pd.nae_ecdf = exact ? StepEcdf::exact(buffer)
                          : StepEcdf::from_counts(counts, 0.0, 1.0);
      // The area over the exact eCDF equals the mean by the step-function
      // identity; the binned curve is display-only, so the mean is the value.
      pd.expected_risk =
          exact ? pd.nae_ecdf.area_over_unit()
                : sum / static_cast<double>(unobserved.size());
      stats.pairs.push_back(std::move(pd));
      min_rms = std::min(
          min_rms, std::sqrt(sq / static_cast<double>(unobserved.size())));
    }
  }
  stats.min_pairwise_rms = min_rms;

  // Per-entry spread across the ensemble: (max - min) / range.
  std::vector<double> max_nae(unobserved.size());
  {
    std::vector<double> lo(unobserved.size(),
                           std::numeric_limits<double>::infinity());
    std::vector<double> hi(unobserved.size(),
                           -std::numeric_limits<double>::infinity());
    for (std::size_t w = 0; w < p; ++w) {
      const double* d = ensemble.worlds[w].matrix.data();
      for (std::size_t i = 0; i < unobserved.size(); ++i) {
        double v = d[unobserved[i]];
        lo[i] = std::min(lo[i], v);
        hi[i] = std::max(hi[i], v);
      }
    }
    for (std::size_t i = 0; i < unobserved.size(); ++i)
      max_nae[i] = (hi[i] - lo[i]) / range;
  }
  // Lower median: conservative for threshold claims on even-sized sets.
  std::vector<double> med(max_nae);
  auto mid = med.begin() + static_cast<std::ptrdiff_t>((med.size() - 1) / 2);
  std::nth_element(med.begin(), mid, med.end());
  stats.median_max_nae = *mid;
  stats.max_nae_ecdf = unobserved.size() <= options.exact_limit
                           ? StepEcdf::exact(std::move(max_nae))
                           : StepEcdf::binned(max_nae, options.bins, 0.0, 1.0);
  return stats;
}

}  // namespace tvaudit
