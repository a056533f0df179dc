#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "tvaudit/graph.hpp"

namespace tvaudit {

// Preferential attachment: start from a complete graph on m_attach nodes,
// then attach each new node to m_attach existing nodes drawn proportional to
// degree, without replacement within one step. The result is a unipartite
// graph embedded in the bipartite container: both sides carry the same node
// ids and each undirected edge appears once as (smaller id -> larger id).
struct BaConfig {
  int n_nodes = 0;
  int m_attach = 1;
  std::uint64_t seed = 0;
};

SampleGraph generate_ba(const BaConfig& config);

// Per-node degree of the unipartite graph a generate_ba call emitted
// (both endpoints of every edge counted).
std::vector<int> combined_degrees(const SampleGraph& g);

// Bipartite graph whose two sides carry Pareto(alpha, x_min) popularity
// weights; m_edges endpoint pairs are drawn proportional to weight and
// duplicates collapse.
struct ParetoBipartiteConfig {
  int n_left = 0, n_right = 0;
  long long m_edges = 0;
  double alpha = 2.0;
  double x_min = 1.0;
  std::uint64_t seed = 0;
};

SampleGraph generate_pareto_bipartite(const ParetoBipartiteConfig& config);

// Sequential edge sampler with controllable biases: draw probability is
// proportional to
//   (1 + times either endpoint was already drawn)^popularity_weight
//     * label^quality_weight
//     * (1 + temporal_memory * recency of the endpoints)
// where recency decays by half each draw. All weights zero gives the uniform
// sampler over edges; labels must be positive when quality_weight > 0.
struct BiasConfig {
  double popularity_weight = 0.0;
  double quality_weight = 0.0;
  double temporal_memory = 0.0;
};

class BiasedSampler {
 public:
  BiasedSampler(const SampleGraph& g, const BiasConfig& config,
                std::uint64_t seed);

  // Index into g.edges() of the next draw.
  int draw();
  // Current (normalized) draw distribution over edges.
  std::vector<double> probabilities() const;

 private:
  std::vector<double> edge_weights() const;  // unnormalized, from current state

  const SampleGraph& g_;
  BiasConfig config_;
  std::mt19937_64 rng_;
  std::vector<int> hit_count_;   // per node (left block, then right block)
  std::vector<double> recency_;  // exponential-decay draw recency per node
};

}  // namespace tvaudit
