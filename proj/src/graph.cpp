#include "tvaudit/graph.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace tvaudit {

const char* side_name(Side side) {
  return side == Side::Left ? "left" : "right";
}

// ---- SampleGraph ------------------------------------------------------------

const std::string& SampleGraph::node_id(Side side, int index) const {
  const auto& ids = side == Side::Left ? left_ids_ : right_ids_;
  return ids.at(static_cast<std::size_t>(index));
}

int SampleGraph::node_index(Side side, const std::string& id) const {
  const auto& index = side == Side::Left ? left_index_ : right_index_;
  auto it = index.find(id);
  return it == index.end() ? -1 : it->second;
}

const MetaRecord* SampleGraph::meta(Side side, int index) const {
  const auto& meta = side == Side::Left ? left_meta_ : right_meta_;
  auto it = meta.find(index);
  return it == meta.end() ? nullptr : &it->second;
}

std::vector<int> SampleGraph::degrees(Side side) const {
  std::vector<int> deg(side == Side::Left ? left_ids_.size()
                                          : right_ids_.size());
  for (const Edge& e : edges_) ++deg[side == Side::Left ? e.left : e.right];
  return deg;
}

std::vector<int> SampleGraph::degrees_with_multiplicity(Side side) const {
  std::vector<int> deg(side == Side::Left ? left_ids_.size()
                                          : right_ids_.size());
  for (const Edge& e : edges_)
    deg[side == Side::Left ? e.left : e.right] += e.multiplicity;
  return deg;
}

const std::vector<std::vector<int>>& SampleGraph::incident(Side side) const {
  return side == Side::Left ? left_incident_ : right_incident_;
}

// ---- Builder ----------------------------------------------------------------

SampleGraph::Builder::Builder(double y_min, double y_max) {
  if (!(y_min <= y_max))
    throw std::invalid_argument("label range: y_min must not exceed y_max");
  g_.y_min_ = y_min;
  g_.y_max_ = y_max;
}

int SampleGraph::Builder::intern(Side side, const std::string& id) {
  auto& ids = side == Side::Left ? g_.left_ids_ : g_.right_ids_;
  auto& index = side == Side::Left ? g_.left_index_ : g_.right_index_;
  auto [it, inserted] = index.emplace(id, static_cast<int>(ids.size()));
  if (inserted) ids.push_back(id);
  return it->second;
}

void SampleGraph::Builder::add_edge(int left, int right, double label,
                                    std::optional<std::int64_t> timestamp) {
  if (left < 0 || left >= static_cast<int>(g_.left_ids_.size()) ||
      right < 0 || right >= static_cast<int>(g_.right_ids_.size()))
    throw std::invalid_argument("edge endpoint index was never interned");
  if (label < g_.y_min_ || label > g_.y_max_)
    throw std::domain_error("edge label " + std::to_string(label) +
                            " outside label range [" +
                            std::to_string(g_.y_min_) + ", " +
                            std::to_string(g_.y_max_) + "]");
  auto [it, inserted] =
      edge_slot_.emplace(std::make_pair(left, right),
                         static_cast<int>(g_.edges_.size()));
  if (inserted) {
    g_.edges_.push_back(Edge{left, right, label, timestamp, 1});
    return;
  }
  // Collapse duplicates: the record with the larger timestamp wins; records
  // without timestamps resolve by arrival order (later record wins).
  Edge& e = g_.edges_[static_cast<std::size_t>(it->second)];
  ++e.multiplicity;
  bool replace = !(timestamp && e.timestamp && *timestamp < *e.timestamp);
  if (replace) {
    e.label = label;
    e.timestamp = timestamp;
  }
}

void SampleGraph::Builder::set_meta(Side side, int index, MetaRecord record) {
  auto& meta = side == Side::Left ? g_.left_meta_ : g_.right_meta_;
  meta[index] = std::move(record);
}

SampleGraph SampleGraph::Builder::build() {
  const int nl = g_.left_count(), nr = g_.right_count();
  for (const Edge& e : g_.edges_) {
    if (e.left < 0 || e.left >= nl || e.right < 0 || e.right >= nr)
      throw std::invalid_argument("edge references out-of-range node index");
  }
  g_.left_incident_.assign(static_cast<std::size_t>(nl), {});
  g_.right_incident_.assign(static_cast<std::size_t>(nr), {});
  for (std::size_t i = 0; i < g_.edges_.size(); ++i) {
    g_.left_incident_[static_cast<std::size_t>(g_.edges_[i].left)].push_back(
        static_cast<int>(i));
    g_.right_incident_[static_cast<std::size_t>(g_.edges_[i].right)].push_back(
        static_cast<int>(i));
  }
  return std::move(g_);
}

// ---- degree sequences -------------------------------------------------------

DegreeSequence degree_sequence(const SampleGraph& g, Side side,
                               bool count_multiplicity) {
  DegreeSequence seq;
  seq.side = side;
  seq.degrees =
      count_multiplicity ? g.degrees_with_multiplicity(side) : g.degrees(side);
  return seq;
}

// ---- ingestion --------------------------------------------------------------

namespace {

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, delim)) out.push_back(field);
  if (!line.empty() && line.back() == delim) out.push_back("");
  return out;
}

[[noreturn]] void parse_fail(const std::string& path, long line_no,
                             const std::string& what) {
  throw std::invalid_argument(path + ":" + std::to_string(line_no) + ": " +
                              what);
}

double parse_real(const std::string& text, const std::string& path,
                  long line_no, const std::string& what) {
  try {
    std::size_t pos = 0;
    double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    parse_fail(path, line_no, "expected " + what + ", got '" + text + "'");
  }
}

std::int64_t parse_int(const std::string& text, const std::string& path,
                       long line_no, const std::string& what) {
  try {
    std::size_t pos = 0;
    long long v = std::stoll(text, &pos);
    if (pos != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    parse_fail(path, line_no, "expected " + what + ", got '" + text + "'");
  }
}

std::ifstream open_or_fail(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  return in;
}

}  // namespace

SampleGraph ingest_movielens(const std::string& data_path,
                             const std::string& user_meta_path) {
  std::ifstream in = open_or_fail(data_path);
  SampleGraph::Builder builder(1.0, 5.0);
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 4)
      parse_fail(data_path, line_no,
                 "expected 4 tab-separated fields, got " +
                     std::to_string(fields.size()));
    double rating = parse_real(fields[2], data_path, line_no, "rating");
    if (rating < 1.0 || rating > 5.0)
      throw std::domain_error(data_path + ":" + std::to_string(line_no) +
                              ": rating " + fields[2] + " outside [1, 5]");
    std::int64_t ts = parse_int(fields[3], data_path, line_no, "timestamp");
    int u = builder.intern(Side::Left, fields[0]);
    int i = builder.intern(Side::Right, fields[1]);
    builder.add_edge(u, i, rating, ts);
  }

  SampleGraph g = builder.build();
  if (user_meta_path.empty()) return g;

  std::ifstream meta_in = open_or_fail(user_meta_path);
  line_no = 0;
  SampleGraph::Builder rebuilt(1.0, 5.0);
  // Metadata attaches to already-interned users only; a builder cannot mutate
  // a built graph, so rebuild with the same interning plus the meta records.
  for (const Edge& e : g.edges()) {
    int u = rebuilt.intern(Side::Left, g.node_id(Side::Left, e.left));
    int i = rebuilt.intern(Side::Right, g.node_id(Side::Right, e.right));
    rebuilt.add_edge(u, i, e.label, e.timestamp);
  }
  while (std::getline(meta_in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split(line, '|');
    if (fields.size() != 5)
      parse_fail(user_meta_path, line_no,
                 "expected 5 pipe-separated fields, got " +
                     std::to_string(fields.size()));
    int index = g.node_index(Side::Left, fields[0]);
    if (index < 0) continue;  // user never rated anything
    rebuilt.set_meta(Side::Left, index,
                     MetaRecord{{"age", fields[1]},
                                {"gender", fields[2]},
                                {"occupation", fields[3]},
                                {"zip", fields[4]}});
  }
  return rebuilt.build();
}

SampleGraph ingest_edge_list(const std::string& path,
                             const EdgeListSchema& schema,
                             std::pair<double, double> label_range) {
  std::ifstream in = open_or_fail(path);
  std::string line;
  long line_no = 0;

  // Resolve column names to positions: against the header row when present,
  // otherwise names must be decimal column indices.
  std::vector<std::string> header;
  if (schema.has_header) {
    if (!std::getline(in, line))
      throw std::invalid_argument(path + ": empty file, expected header row");
    ++line_no;
    header = split(line, schema.delimiter);
  }
  auto resolve = [&](const std::string& name, bool required) -> int {
    if (name.empty()) {
      if (required)
        throw std::invalid_argument("edge list schema: id column unset");
      return -1;
    }
    if (schema.has_header) {
      auto it = std::find(header.begin(), header.end(), name);
      if (it == header.end())
        throw std::invalid_argument(path + ": unknown column '" + name + "'");
      return static_cast<int>(it - header.begin());
    }
    try {
      return static_cast<int>(parse_int(name, path, 0, "column index"));
    } catch (const std::exception&) {
      throw std::invalid_argument(
          "edge list schema: with no header, column names must be indices; "
          "got '" +
          name + "'");
    }
  };
  int left_col = resolve(schema.left_column, true);
  int right_col = resolve(schema.right_column, true);
  int label_col = resolve(schema.label_column, false);
  int ts_col = resolve(schema.timestamp_column, false);

  SampleGraph::Builder builder(label_range.first, label_range.second);
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split(line, schema.delimiter);
    int max_col = std::max(std::max(left_col, right_col),
                           std::max(label_col, ts_col));
    if (static_cast<int>(fields.size()) <= max_col)
      parse_fail(path, line_no,
                 "expected at least " + std::to_string(max_col + 1) +
                     " fields, got " + std::to_string(fields.size()));
    int l = builder.intern(Side::Left, fields[static_cast<std::size_t>(left_col)]);
    int r =
        builder.intern(Side::Right, fields[static_cast<std::size_t>(right_col)]);
    double label =
        label_col < 0
            ? 1.0
            : parse_real(fields[static_cast<std::size_t>(label_col)], path,
                         line_no, "numeric label");
    std::optional<std::int64_t> ts;
    if (ts_col >= 0)
      ts = parse_int(fields[static_cast<std::size_t>(ts_col)], path, line_no,
                     "integer timestamp");
    try {
      builder.add_edge(l, r, label, ts);
    } catch (const std::domain_error& e) {
      throw std::domain_error(path + ":" + std::to_string(line_no) + ": " +
                              e.what());
    }
  }
  return builder.build();
}

void write_edge_list(const SampleGraph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open file for write: " + path);
  bool any_ts = std::any_of(g.edges().begin(), g.edges().end(),
                            [](const Edge& e) { return e.timestamp.has_value(); });
  out << "left\tright\tlabel";
  if (any_ts) out << "\ttimestamp";
  out << "\n";
  out.precision(17);
  for (const Edge& e : g.edges()) {
    out << g.node_id(Side::Left, e.left) << '\t'
        << g.node_id(Side::Right, e.right) << '\t' << e.label;
    if (any_ts) out << '\t' << (e.timestamp ? *e.timestamp : 0);
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

// ---- core decomposition -----------------------------------------------------

int CoreDecomposition::min_core() const {
  int m = 0;
  bool first = true;
  for (const auto* v : {&left_core, &right_core})
    for (int c : *v) {
      m = first ? c : std::min(m, c);
      first = false;
    }
  return first ? 0 : m;
}

CoreDecomposition kcore_decompose(const SampleGraph& g) {
  // Bucket peeling over the union of both node sets (left nodes first, then
  // right nodes shifted by left_count). O(n + m) plus the bucket sort.
  const int nl = g.left_count(), nr = g.right_count(), n = nl + nr;
  CoreDecomposition cd;
  cd.left_core.assign(static_cast<std::size_t>(nl), 0);
  cd.right_core.assign(static_cast<std::size_t>(nr), 0);
  if (n == 0) return cd;

  std::vector<int> deg(static_cast<std::size_t>(n), 0);
  {
    auto dl = g.degrees(Side::Left);
    auto dr = g.degrees(Side::Right);
    std::copy(dl.begin(), dl.end(), deg.begin());
    std::copy(dr.begin(), dr.end(), deg.begin() + nl);
  }
  int max_deg = *std::max_element(deg.begin(), deg.end());

  // vert: nodes sorted by degree; pos: node -> slot; bin: first slot per degree.
  std::vector<int> bin(static_cast<std::size_t>(max_deg + 2), 0);
  for (int d : deg) ++bin[static_cast<std::size_t>(d)];
  int start = 0;
  for (int d = 0; d <= max_deg; ++d) {
    int count = bin[static_cast<std::size_t>(d)];
    bin[static_cast<std::size_t>(d)] = start;
    start += count;
  }
  std::vector<int> vert(static_cast<std::size_t>(n)), pos(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) {
    pos[static_cast<std::size_t>(v)] = bin[static_cast<std::size_t>(deg[static_cast<std::size_t>(v)])]++;
    vert[static_cast<std::size_t>(pos[static_cast<std::size_t>(v)])] = v;
  }
  for (int d = max_deg; d > 0; --d)
    bin[static_cast<std::size_t>(d)] = bin[static_cast<std::size_t>(d - 1)];
  bin[0] = 0;

  auto neighbors = [&](int v, auto&& visit) {
    if (v < nl) {
      for (int ei : g.incident(Side::Left)[static_cast<std::size_t>(v)])
        visit(nl + g.edges()[static_cast<std::size_t>(ei)].right);
    } else {
      for (int ei : g.incident(Side::Right)[static_cast<std::size_t>(v - nl)])
        visit(g.edges()[static_cast<std::size_t>(ei)].left);
    }
  };

  std::vector<int> core(deg);
  for (int i = 0; i < n; ++i) {
    int v = vert[static_cast<std::size_t>(i)];
    neighbors(v, [&](int u) {
      if (core[static_cast<std::size_t>(u)] > core[static_cast<std::size_t>(v)]) {
        // Move u one slot toward the front of its bucket and shrink its degree.
        int du = core[static_cast<std::size_t>(u)];
        int pu = pos[static_cast<std::size_t>(u)];
        int pw = bin[static_cast<std::size_t>(du)];
        int w = vert[static_cast<std::size_t>(pw)];
        if (u != w) {
          std::swap(vert[static_cast<std::size_t>(pu)], vert[static_cast<std::size_t>(pw)]);
          pos[static_cast<std::size_t>(u)] = pw;
          pos[static_cast<std::size_t>(w)] = pu;
        }
        ++bin[static_cast<std::size_t>(du)];
        --core[static_cast<std::size_t>(u)];
      }
    });
  }

  for (int v = 0; v < nl; ++v)
    cd.left_core[static_cast<std::size_t>(v)] = core[static_cast<std::size_t>(v)];
  for (int v = 0; v < nr; ++v)
    cd.right_core[static_cast<std::size_t>(v)] = core[static_cast<std::size_t>(nl + v)];
  cd.max_core = *std::max_element(core.begin(), core.end());
  return cd;
}

bool is_k_connected(const SampleGraph& g, int k, ConnectivityRule rule) {
  if (k <= 0) return true;
  if (rule == ConnectivityRule::DegreeOnly) {
    for (Side s : {Side::Left, Side::Right})
      for (int d : g.degrees(s))
        if (d < k) return false;
    return true;
  }
  CoreDecomposition cd = kcore_decompose(g);
  if (g.left_count() + g.right_count() == 0) return true;
  return cd.min_core() >= k;
}

// ---- group-conditional core curves -----------------------------------------

double CoreCdf::at(int k) const {
  if (k < 0) return 1.0;
  if (k >= static_cast<int>(frac_at_least.size())) return 0.0;
  return frac_at_least[static_cast<std::size_t>(k)];
}

std::map<std::string, CoreCdf> group_core_cdf(const SampleGraph& g,
                                              const CoreDecomposition& cd,
                                              Side side,
                                              const std::string& attribute) {
  const int n = side == Side::Left ? g.left_count() : g.right_count();
  std::map<std::string, std::vector<int>> members;  // group -> core numbers
  bool attribute_seen = false;
  for (int v = 0; v < n; ++v) {
    const MetaRecord* meta = g.meta(side, v);
    if (!meta) continue;
    auto it = meta->find(attribute);
    if (it == meta->end()) continue;
    attribute_seen = true;
    members[it->second].push_back(cd.core(side, v));
  }
  if (!attribute_seen)
    throw std::invalid_argument("unknown " + std::string(side_name(side)) +
                                "-side attribute '" + attribute + "'");

  std::map<std::string, CoreCdf> out;
  for (auto& [group, cores] : members) {
    // counts[k] = members with core number >= k, for k = 0..max_core+1.
    std::vector<double> frac(static_cast<std::size_t>(cd.max_core + 2), 0.0);
    for (int c : cores)
      for (int k = 0; k <= c; ++k) frac[static_cast<std::size_t>(k)] += 1.0;
    for (double& f : frac) f /= static_cast<double>(cores.size());
    out.emplace(group, CoreCdf{std::move(frac)});
  }
  return out;
}

// ---- ternary projection -----------------------------------------------------

SampleGraph project_ternary(const std::vector<Triple>& triples,
                            int summed_index) {
  if (summed_index < 0 || summed_index > 2)
    throw std::invalid_argument("summed_index must be 0, 1, or 2");
  if (triples.empty())
    throw std::invalid_argument("cannot project an empty observation set");

  // Distinct summed-out values per remaining pair, in first-appearance order.
  std::vector<std::pair<std::pair<int, int>, int>> pairs;  // pair, count
  std::map<std::pair<int, int>, std::set<int>> seen;
  for (const Triple& t : triples) {
    int idx[3] = {t.a, t.b, t.c};
    std::pair<int, int> key;
    switch (summed_index) {
      case 0: key = {idx[1], idx[2]}; break;
      case 1: key = {idx[0], idx[2]}; break;
      default: key = {idx[0], idx[1]}; break;
    }
    auto [it, inserted] = seen.emplace(key, std::set<int>{});
    if (inserted) pairs.push_back({key, 0});
    it->second.insert(idx[summed_index]);
  }
  int max_count = 1;
  for (auto& [key, count] : pairs) {
    count = static_cast<int>(seen[key].size());
    max_count = std::max(max_count, count);
  }

  SampleGraph::Builder builder(0.0, static_cast<double>(max_count));
  for (const auto& [key, count] : pairs) {
    int l = builder.intern(Side::Left, std::to_string(key.first));
    int r = builder.intern(Side::Right, std::to_string(key.second));
    builder.add_edge(l, r, static_cast<double>(count));
  }
  return builder.build();
}

}  // namespace tvaudit
