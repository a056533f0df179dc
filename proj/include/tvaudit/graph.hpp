#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tvaudit {

enum class Side { Left, Right };

const char* side_name(Side side);

// One observed interaction after duplicate collapse. `multiplicity` counts how
// many raw records mapped onto this pair (the kept label is the one with the
// largest timestamp; ties and untimestamped records keep the later record).
struct Edge {
  int left = 0;
  int right = 0;
  double label = 1.0;
  std::optional<std::int64_t> timestamp;
  int multiplicity = 1;
};

using MetaRecord = std::map<std::string, std::string>;

// Immutable bipartite interaction graph. Node ids are interned to dense
// indices 0..n-1 in first-appearance order; duplicate (left,right) pairs are
// collapsed at build time so the graph is simple.
class SampleGraph {
 public:
  class Builder;

  int left_count() const { return static_cast<int>(left_ids_.size()); }
  int right_count() const { return static_cast<int>(right_ids_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  double y_min() const { return y_min_; }
  double y_max() const { return y_max_; }

  const std::string& node_id(Side side, int index) const;
  // -1 when the id was never seen.
  int node_index(Side side, const std::string& id) const;

  // nullptr when the node has no metadata record.
  const MetaRecord* meta(Side side, int index) const;

  // Simple-graph degrees (one per collapsed edge); index-aligned with nodes.
  std::vector<int> degrees(Side side) const;
  // Raw-record degrees: each duplicate record counts.
  std::vector<int> degrees_with_multiplicity(Side side) const;

  // Adjacency as edge indices per node, built lazily at construction.
  const std::vector<std::vector<int>>& incident(Side side) const;

 private:
  friend class Builder;
  std::vector<std::string> left_ids_, right_ids_;
  std::map<std::string, int> left_index_, right_index_;
  std::vector<Edge> edges_;
  std::map<int, MetaRecord> left_meta_, right_meta_;
  std::vector<std::vector<int>> left_incident_, right_incident_;
  double y_min_ = 0.0, y_max_ = 1.0;
};

class SampleGraph::Builder {
 public:
  explicit Builder(double y_min, double y_max);

  int intern(Side side, const std::string& id);
  // Records one raw interaction; duplicate (left,right) pairs collapse,
  // keeping the label of the record with the largest timestamp.
  void add_edge(int left, int right, double label,
                std::optional<std::int64_t> timestamp = std::nullopt);
  void set_meta(Side side, int index, MetaRecord record);

  SampleGraph build();

 private:
  SampleGraph g_;
  std::map<std::pair<int, int>, int> edge_slot_;
};

// Per-node core numbers over the union of both node sets.
struct CoreDecomposition {
  std::vector<int> left_core, right_core;
  int max_core = 0;

  int core(Side side, int index) const {
    return side == Side::Left ? left_core[index] : right_core[index];
  }
  int min_core() const;
};

// Degrees of one side as a multiset (index-aligned with that side's nodes).
struct DegreeSequence {
  Side side = Side::Left;
  std::vector<int> degrees;

  std::size_t n() const { return degrees.size(); }
};

DegreeSequence degree_sequence(const SampleGraph& g, Side side,
                               bool count_multiplicity = false);

// MovieLens 100k layout: ratings as TSV rows `user \t item \t rating \t
// timestamp`, optional user file with pipe-separated `user|age|gender|
// occupation|zip`. Ratings must lie in [1,5].
SampleGraph ingest_movielens(const std::string& data_path,
                             const std::string& user_meta_path = {});

struct EdgeListSchema {
  std::string left_column = "left";
  std::string right_column = "right";
  std::string label_column;      // empty: no labels, all 1.0
  std::string timestamp_column;  // empty: no timestamps
  char delimiter = '\t';
  bool has_header = true;
};

SampleGraph ingest_edge_list(const std::string& path,
                             const EdgeListSchema& schema,
                             std::pair<double, double> label_range);

// Writes a graph in the edge-list format ingest_edge_list reads back
// (header `left<TAB>right<TAB>label[<TAB>timestamp]`).
void write_edge_list(const SampleGraph& g, const std::string& path);

// Exact core numbers by bucket peeling over the union of both node sets.
CoreDecomposition kcore_decompose(const SampleGraph& g);

// Canonically: every node's core number is at least k. The DegreeOnly variant
// (every node's degree at least k) is a strictly weaker check, exposed for
// comparison only.
enum class ConnectivityRule { KCore, DegreeOnly };
bool is_k_connected(const SampleGraph& g, int k,
                    ConnectivityRule rule = ConnectivityRule::KCore);

// Step curve over k = 0..max_core+1: fraction of the group whose core number
// is >= k. Starts at 1.0, non-increasing, ends at 0.0.
struct CoreCdf {
  std::vector<double> frac_at_least;

  double at(int k) const;
};

std::map<std::string, CoreCdf> group_core_cdf(const SampleGraph& g,
                                              const CoreDecomposition& cd,
                                              Side side,
                                              const std::string& attribute);

// Ternary observations (s,p,o); project_ternary sums out one index and emits
// the bipartite graph over the remaining two, edge weight = number of
// distinct summed-out values seen for that pair.
struct Triple {
  int a = 0, b = 0, c = 0;
};

SampleGraph project_ternary(const std::vector<Triple>& triples,
                            int summed_index);

}  // namespace tvaudit
