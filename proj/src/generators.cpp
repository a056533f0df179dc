#include "tvaudit/generators.hpp"

#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

namespace tvaudit {

// ---- preferential attachment ------------------------------------------------

SampleGraph generate_ba(const BaConfig& config) {
  if (config.m_attach < 1)
    throw std::invalid_argument("m_attach must be >= 1");
  if (config.n_nodes <= config.m_attach)
    throw std::invalid_argument("n_nodes must exceed m_attach");

  const int n = config.n_nodes, m = config.m_attach;
  std::mt19937_64 rng(config.seed);

  SampleGraph::Builder builder(0.0, 1.0);
  for (int v = 0; v < n; ++v) {
    builder.intern(Side::Left, std::to_string(v));
    builder.intern(Side::Right, std::to_string(v));
  }
  auto add_undirected = [&](int u, int v) {
    builder.add_edge(std::min(u, v), std::max(u, v), 1.0);
  };

  // Degree-proportional sampling via the repeated-id array: every edge
  // endpoint is appended, so a uniform pick lands on node v with probability
  // deg(v) / (2 |E|).
  std::vector<int> endpoint_pool;
  endpoint_pool.reserve(static_cast<std::size_t>(2 * m * n));
  for (int u = 0; u < m; ++u)
    for (int v = u + 1; v < m; ++v) {
      add_undirected(u, v);
      endpoint_pool.push_back(u);
      endpoint_pool.push_back(v);
    }

  std::set<int> chosen;
  for (int v = m; v < n; ++v) {
    chosen.clear();
    while (static_cast<int>(chosen.size()) < m) {
      int target;
      if (endpoint_pool.empty()) {
        // Degenerate seed graph (m_attach = 1): no endpoints yet, attach
        // uniformly among the existing nodes.
        std::uniform_int_distribution<int> unif(0, v - 1);
        target = unif(rng);
      } else {
        std::uniform_int_distribution<std::size_t> unif(
            0, endpoint_pool.size() - 1);
        target = endpoint_pool[unif(rng)];
      }
      chosen.insert(target);  // without replacement within this step
    }
    for (int target : chosen) {
      add_undirected(v, target);
      endpoint_pool.push_back(v);
      endpoint_pool.push_back(target);
    }
  }
  return builder.build();
}

std::vector<int> combined_degrees(const SampleGraph& g) {
  if (g.left_count() != g.right_count())
    throw std::invalid_argument(
        "combined degrees need a unipartite embedding (equal sides)");
  std::vector<int> deg(static_cast<std::size_t>(g.left_count()), 0);
  for (const Edge& e : g.edges()) {
    ++deg[static_cast<std::size_t>(e.left)];
    ++deg[static_cast<std::size_t>(e.right)];
  }
  return deg;
}

// ---- heavy-tailed bipartite -------------------------------------------------

SampleGraph generate_pareto_bipartite(const ParetoBipartiteConfig& config) {
  if (config.n_left < 1 || config.n_right < 1)
    throw std::invalid_argument("both sides need at least one node");
  if (config.m_edges < 0)
    throw std::invalid_argument("edge count must be nonnegative");
  if (config.alpha <= 0.0 || config.x_min <= 0.0)
    throw std::invalid_argument("alpha and x_min must be positive");

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto pareto_weights = [&](int count) {
    std::vector<double> w(static_cast<std::size_t>(count));
    for (double& v : w)
      v = config.x_min * std::pow(1.0 - unif(rng), -1.0 / config.alpha);
    return w;
  };
  std::vector<double> left_w = pareto_weights(config.n_left);
  std::vector<double> right_w = pareto_weights(config.n_right);
  std::discrete_distribution<int> pick_left(left_w.begin(), left_w.end());
  std::discrete_distribution<int> pick_right(right_w.begin(), right_w.end());

  SampleGraph::Builder builder(0.0, 1.0);
  for (int v = 0; v < config.n_left; ++v)
    builder.intern(Side::Left, std::to_string(v));
  for (int v = 0; v < config.n_right; ++v)
    builder.intern(Side::Right, std::to_string(v));
  for (long long e = 0; e < config.m_edges; ++e)
    builder.add_edge(pick_left(rng), pick_right(rng), 1.0);
  return builder.build();
}

// ---- biased sampling --------------------------------------------------------

BiasedSampler::BiasedSampler(const SampleGraph& g, const BiasConfig& config,
                             std::uint64_t seed)
    : g_(g), config_(config), rng_(seed) {
  if (config.popularity_weight < 0.0 || config.quality_weight < 0.0 ||
      config.temporal_memory < 0.0)
    throw std::invalid_argument("bias weights must be nonnegative");
  if (g.edges().empty())
    throw std::invalid_argument("sampler needs a graph with edges");
  if (config.quality_weight > 0.0)
    for (const Edge& e : g.edges())
      if (e.label <= 0.0)
        throw std::invalid_argument(
            "quality bias needs strictly positive labels");
  hit_count_.assign(
      static_cast<std::size_t>(g.left_count() + g.right_count()), 0);
  recency_.assign(hit_count_.size(), 0.0);
}

std::vector<double> BiasedSampler::edge_weights() const {
  const int nl = g_.left_count();
  std::vector<double> w(g_.edges().size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const Edge& e = g_.edges()[i];
    const std::size_t l = static_cast<std::size_t>(e.left);
    const std::size_t r = static_cast<std::size_t>(nl + e.right);
    double weight = 1.0;
    if (config_.popularity_weight > 0.0)
      weight *= std::pow(1.0 + hit_count_[l] + hit_count_[r],
                         config_.popularity_weight);
    if (config_.quality_weight > 0.0)
      weight *= std::pow(e.label, config_.quality_weight);
    if (config_.temporal_memory > 0.0)
      weight *= 1.0 + config_.temporal_memory * (recency_[l] + recency_[r]);
    w[i] = weight;
  }
  return w;
}

int BiasedSampler::draw() {
  std::vector<double> w = edge_weights();
  double total = 0.0;
  for (double v : w) total += v;
  std::uniform_real_distribution<double> unif(0.0, total);
  double r = unif(rng_);
  std::size_t idx = 0;
  for (; idx + 1 < w.size(); ++idx) {
    if (r < w[idx]) break;
    r -= w[idx];
  }
  const Edge& e = g_.edges()[idx];
  for (double& rec : recency_) rec *= 0.5;
  const std::size_t l = static_cast<std::size_t>(e.left);
  const std::size_t rr = static_cast<std::size_t>(g_.left_count() + e.right);
  ++hit_count_[l];
  ++hit_count_[rr];
  recency_[l] += 1.0;
  recency_[rr] += 1.0;
  return static_cast<int>(idx);
}

std::vector<double> BiasedSampler::probabilities() const {
  std::vector<double> w = edge_weights();
  double total = 0.0;
  for (double v : w) total += v;
  for (double& v : w) v /= total;
  return w;
}

}  // namespace tvaudit
