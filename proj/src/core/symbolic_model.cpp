#include "symbolic_model.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "errors.hpp"
#include "format.hpp"

namespace homdim {

namespace {

constexpr std::size_t kMaxRank = 8;
constexpr std::size_t kMaxRoofLevels = 8;

std::size_t gcd_sz(std::size_t a, std::size_t b) { return std::gcd(a, b); }

// Tarjan SCC; returns component id per vertex.
std::vector<std::size_t> strongly_connected(std::size_t n,
                                            const std::vector<std::vector<std::size_t>>& adj,
                                            std::size_t& n_comp) {
  std::vector<std::size_t> index(n, SIZE_MAX), low(n, 0), comp(n, SIZE_MAX);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::size_t counter = 0;
  n_comp = 0;
  std::function<void(std::size_t)> strong = [&](std::size_t v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (auto w : adj[v]) {
      if (index[w] == SIZE_MAX) {
        strong(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp[w] = n_comp;
      } while (w != v);
      ++n_comp;
    }
  };
  for (std::size_t v = 0; v < n; ++v)
    if (index[v] == SIZE_MAX) strong(v);
  return comp;
}

ValidationReport compute_report(std::size_t n_states, const std::vector<SymbolicFlow::Edge>& edges) {
  ValidationReport rep;
  rep.r_min = std::numeric_limits<double>::infinity();
  std::vector<std::vector<std::size_t>> adj(n_states);
  for (const auto& e : edges) {
    adj[e.from].push_back(e.to);
    rep.r_min = std::min(rep.r_min, e.roof);
  }
  std::size_t n_comp = 0;
  const auto comp = strongly_connected(n_states, adj, n_comp);
  rep.irreducible = (n_comp == 1);

  // Period: within each component, BFS levels from a root; the gcd of
  // level(u) + 1 - level(v) over internal edges is the cycle-length gcd.
  std::size_t g = 0;
  for (std::size_t c = 0; c < n_comp; ++c) {
    std::size_t root = SIZE_MAX;
    for (std::size_t v = 0; v < n_states; ++v)
      if (comp[v] == c) {
        root = v;
        break;
      }
    std::vector<long long> level(n_states, -1);
    std::vector<std::size_t> queue{root};
    level[root] = 0;
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
      const auto v = queue[qi];
      for (auto w : adj[v])
        if (comp[w] == c && level[w] < 0) {
          level[w] = level[v] + 1;
          queue.push_back(w);
        }
    }
    for (const auto& e : edges)
      if (comp[e.from] == c && comp[e.to] == c) {
        const long long d = level[e.from] + 1 - level[e.to];
        g = gcd_sz(g, static_cast<std::size_t>(d < 0 ? -d : d));
      }
  }
  rep.period = g;
  rep.aperiodic = (g == 1);
  return rep;
}

}  // namespace

// ---------------------------------------------------------------------------
// SymbolicFlow

SymbolicFlow::SymbolicFlow(FlowSpec spec) : spec_(std::move(spec)) {
  if (spec_.k == 0) throw InputError("flow: homology rank k must be >= 1");
  if (spec_.k > kMaxRank)
    throw InputError("flow: homology rank k = " + std::to_string(spec_.k) + " exceeds " +
                     std::to_string(kMaxRank));
  if (spec_.states.empty()) throw InputError("flow: no states");
  if (spec_.edges.empty()) throw InputError("flow: empty edge list");
  std::map<std::string, std::size_t> ids;
  for (std::size_t i = 0; i < spec_.states.size(); ++i)
    if (!ids.emplace(spec_.states[i], i).second)
      throw InputError("flow: duplicate state '" + spec_.states[i] + "'");
  for (std::size_t i = 0; i < spec_.edges.size(); ++i) {
    const auto& es = spec_.edges[i];
    const std::string where = "flow: edge " + std::to_string(i);
    auto from = ids.find(es.from);
    auto to = ids.find(es.to);
    if (from == ids.end()) throw InputError(where + ": unknown state '" + es.from + "'");
    if (to == ids.end()) throw InputError(where + ": unknown state '" + es.to + "'");
    if (!(es.roof > 0.0) || !std::isfinite(es.roof))
      throw InputError(where + ": roof must be positive, got " + format_double(es.roof));
    if (es.f.size() != spec_.k)
      throw InputError(where + ": cocycle has length " + std::to_string(es.f.size()) +
                       ", expected k = " + std::to_string(spec_.k));
    edges_.push_back(Edge{from->second, to->second, es.roof, es.f});
  }
  report_ = compute_report(spec_.states.size(), edges_);
}

bool SymbolicFlow::constant_roof() const {
  return std::all_of(edges_.begin(), edges_.end(),
                     [&](const Edge& e) { return e.roof == edges_.front().roof; });
}

ValidationReport validate(const SymbolicFlow& flow) { return flow.report(); }

// ---------------------------------------------------------------------------
// Builtin models

namespace {

constexpr double kGolden = 1.6180339887498949;

FlowSpec bouquet(std::string name, std::size_t k, std::vector<std::pair<double, IntVec>> loops) {
  FlowSpec s;
  s.name = std::move(name);
  s.k = k;
  s.states = {"o"};
  for (auto& [roof, f] : loops) s.edges.push_back(FlowEdgeSpec{"o", "o", roof, std::move(f)});
  return s;
}

}  // namespace

FlowSpec builtin_flow(std::string_view name) {
  if (name == "fs2") return bouquet("fs2", 1, {{1.0, {1}}, {1.0, {-1}}});
  if (name == "fs2-graph") {
    // Vertex presentation of fs2: the cocycle of u->v is the symbol u.
    FlowSpec s;
    s.name = "fs2-graph";
    s.k = 1;
    s.states = {"a", "b"};
    s.edges = {{"a", "a", 1.0, {1}}, {"a", "b", 1.0, {1}}, {"b", "a", 1.0, {-1}},
               {"b", "b", 1.0, {-1}}};
    return s;
  }
  if (name == "fs4")
    return bouquet("fs4", 2, {{1.0, {1, 0}}, {1.0, {-1, 0}}, {1.0, {0, 1}}, {1.0, {0, -1}}});
  if (name == "fs6")
    return bouquet("fs6", 3,
                   {{1.0, {1, 0, 0}},
                    {1.0, {-1, 0, 0}},
                    {1.0, {0, 1, 0}},
                    {1.0, {0, -1, 0}},
                    {1.0, {0, 0, 1}},
                    {1.0, {0, 0, -1}}});
  if (name == "wm3") return bouquet("wm3", 1, {{1.0, {1}}, {1.0, {-1}}, {kGolden, {0}}});
  if (name == "wm5")
    return bouquet("wm5", 2,
                   {{1.0, {1, 0}}, {1.0, {-1, 0}}, {1.0, {0, 1}}, {1.0, {0, -1}}, {kGolden, {0, 0}}});
  throw InputError("unknown builtin model '" + std::string(name) + "'");
}

std::vector<std::string> builtin_flow_names() {
  return {"fs2", "fs2-graph", "fs4", "fs6", "wm3", "wm5"};
}

// ---------------------------------------------------------------------------
// OrbitHistogram

OrbitHistogram::OrbitHistogram(std::size_t k, double t_max, std::vector<HistogramEntry> entries)
    : k_(k), t_max_(t_max) {
  std::sort(entries.begin(), entries.end(), [](const HistogramEntry& a, const HistogramEntry& b) {
    if (a.length != b.length) return a.length < b.length;
    return a.cls < b.cls;
  });
  for (auto& e : entries) {
    if (e.count == 0) continue;
    if (e.cls.size() != k_) throw InputError("histogram entry has wrong class dimension");
    if (e.length > t_max_) throw InputError("histogram entry longer than its cutoff");
    if (!entries_.empty() && entries_.back().length == e.length && entries_.back().cls == e.cls)
      entries_.back().count += e.count;
    else
      entries_.push_back(std::move(e));
  }
}

void OrbitHistogram::check_range(double t) const {
  if (t > t_max_)
    throw RangeError("histogram is complete only up to T = " + format_double(t_max_) +
                     ", requested " + format_double(t));
}

std::uint64_t OrbitHistogram::total(double t) const {
  check_range(t);
  std::uint64_t n = 0;
  for (const auto& e : entries_) {
    if (e.length > t) break;
    n += e.count;
  }
  return n;
}

std::uint64_t OrbitHistogram::count_by_class(std::span<const std::int64_t> alpha, double t) const {
  check_range(t);
  if (alpha.size() != k_) throw InputError("count_by_class: class has wrong dimension");
  std::uint64_t n = 0;
  for (const auto& e : entries_) {
    if (e.length > t) break;
    if (std::equal(alpha.begin(), alpha.end(), e.cls.begin())) n += e.count;
  }
  return n;
}

std::uint64_t OrbitHistogram::count_set(const LatticeSet& a, double t) const {
  check_range(t);
  if (a.rank() != k_) throw InputError("count_set: set and histogram dimensions differ");
  std::uint64_t n = 0;
  for (const auto& [cls, c] : class_counts(t))
    if (a.contains(cls)) n += c;
  return n;
}

std::map<IntVec, std::uint64_t> OrbitHistogram::class_counts(double t) const {
  check_range(t);
  std::map<IntVec, std::uint64_t> out;
  for (const auto& e : entries_) {
    if (e.length > t) break;
    out[e.cls] += e.count;
  }
  return out;
}

OrbitHistogram OrbitHistogram::restricted(double t) const {
  check_range(t);
  std::vector<HistogramEntry> kept;
  for (const auto& e : entries_) {
    if (e.length > t) break;
    kept.push_back(e);
  }
  return OrbitHistogram(k_, t, std::move(kept));
}

std::string OrbitHistogram::to_csv() const {
  std::string out = "length";
  for (std::size_t i = 1; i <= k_; ++i) out += ",class_" + std::to_string(i);
  out += ",count\n";
  for (const auto& e : entries_) {
    out += format_double(e.length);
    for (auto c : e.cls) out += "," + format_int(c);
    out += "," + std::to_string(e.count) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Orbit enumeration
//
// Primitive periodic orbits are cyclic classes of closed edge words that are
// not proper powers; each is represented by its Lyndon word (least rotation
// under edge-index order). The search walks the tree of prenecklaces
// (Fredricksen-Kessler-Maiorana) restricted to valid paths: a prefix of
// length t with period p may be extended by word[t-p] (period kept) or any
// larger edge (period becomes t+1), and is a Lyndon word iff p == t.

std::size_t word_length_bound(const SymbolicFlow& flow, double t) {
  if (!(t > 0)) return 0;
  const double n = std::floor(t / flow.r_min() * (1.0 + 1e-12));
  if (n > 1e15) return std::numeric_limits<std::size_t>::max();
  return static_cast<std::size_t>(n);
}

namespace {

struct Key {
  std::array<std::int32_t, kMaxRank + kMaxRoofLevels> v{};
  bool operator==(const Key&) const = default;
};

struct KeyHash {
  std::size_t operator()(const Key& k) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (auto x : k.v) {
      h ^= static_cast<std::uint32_t>(x);
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

class OrbitSearch {
 public:
  OrbitSearch(const SymbolicFlow& flow, double t, std::size_t max_word)
      : flow_(flow), t_(t), n_max_(max_word), k_(flow.rank()) {
    const auto& edges = flow.edges();
    for (const auto& e : edges) levels_.push_back(e.roof);
    std::sort(levels_.begin(), levels_.end());
    levels_.erase(std::unique(levels_.begin(), levels_.end()), levels_.end());
    if (levels_.size() > kMaxRoofLevels)
      throw InputError("flow has more than " + std::to_string(kMaxRoofLevels) +
                       " distinct roof values");
    for (const auto& e : edges)
      edge_level_.push_back(static_cast<std::size_t>(
          std::lower_bound(levels_.begin(), levels_.end(), e.roof) - levels_.begin()));

    out_.resize(flow.num_states());
    for (std::size_t i = 0; i < edges.size(); ++i) out_[edges[i].from].push_back(i);

    // Shortest roof length from each state back to each state.
    const auto ns = flow.num_states();
    dist_.assign(ns * ns, std::numeric_limits<double>::infinity());
    for (std::size_t v = 0; v < ns; ++v) dist_[v * ns + v] = 0.0;
    for (const auto& e : edges)
      dist_[e.from * ns + e.to] = std::min(dist_[e.from * ns + e.to], e.roof);
    for (std::size_t m = 0; m < ns; ++m)
      for (std::size_t a = 0; a < ns; ++a)
        for (std::size_t b = 0; b < ns; ++b)
          dist_[a * ns + b] = std::min(dist_[a * ns + b], dist_[a * ns + m] + dist_[m * ns + b]);

    // Dense accumulator layout: roof-level counts in [0, n_max], class
    // coordinates in [-n_max * fmax_i, n_max * fmax_i].
    double cells = 1.0;
    for (std::size_t l = 0; l < levels_.size(); ++l) {
      strides_.push_back(static_cast<std::uint64_t>(cells));
      dims_.push_back(static_cast<std::int64_t>(n_max_) + 1);
      offsets_.push_back(0);
      cells *= static_cast<double>(n_max_ + 1);
    }
    for (std::size_t i = 0; i < k_; ++i) {
      std::int64_t fmax = 0;
      for (const auto& e : edges) fmax = std::max<std::int64_t>(fmax, std::abs(e.f[i]));
      const std::int64_t half = fmax * static_cast<std::int64_t>(n_max_);
      strides_.push_back(static_cast<std::uint64_t>(cells));
      dims_.push_back(2 * half + 1);
      offsets_.push_back(half);
      cells *= static_cast<double>(2 * half + 1);
    }
    dense_ = cells <= static_cast<double>(kDenseCells);
    if (dense_) {
      cells_ = static_cast<std::size_t>(cells);
      base_index_ = 0;
      for (std::size_t i = 0; i < k_; ++i)
        base_index_ += static_cast<std::uint64_t>(offsets_[levels_.size() + i]) *
                       strides_[levels_.size() + i];
      for (std::size_t ei = 0; ei < edges.size(); ++ei) {
        std::int64_t d = static_cast<std::int64_t>(strides_[edge_level_[ei]]);
        for (std::size_t i = 0; i < k_; ++i)
          d += edges[ei].f[i] * static_cast<std::int64_t>(strides_[levels_.size() + i]);
        edge_delta_.push_back(d);
      }
    }
  }

  struct Accumulator {
    std::vector<std::uint64_t> dense;
    std::unordered_map<Key, std::uint64_t, KeyHash> sparse;
  };

  struct Task {
    std::vector<std::size_t> prefix;
    std::size_t period;
  };

  Accumulator make_accumulator() const {
    Accumulator acc;
    if (dense_) acc.dense.assign(cells_, 0);
    return acc;
  }

  // Walks the tree up to `split` letters, emitting shallow orbits into acc
  // and returning the nodes at depth `split` as independent tasks.
  std::vector<Task> split(std::size_t depth, Accumulator& acc) const {
    std::vector<Task> tasks;
    Walker w(*this, acc);
    w.collect_depth = depth;
    w.tasks = &tasks;
    for (std::size_t e = 0; e < flow_.edges().size(); ++e) {
      if (!w.push(e)) continue;
      w.extend(1);
      w.pop();
    }
    return tasks;
  }

  void run_task(const Task& task, Accumulator& acc) const {
    Walker w(*this, acc);
    for (auto e : task.prefix) w.push_unchecked(e);
    w.extend(task.period);
  }

  void run_all(Accumulator& acc) const {
    Walker w(*this, acc);
    for (std::size_t e = 0; e < flow_.edges().size(); ++e) {
      if (!w.push(e)) continue;
      w.extend(1);
      w.pop();
    }
  }

  std::vector<HistogramEntry> collect(const std::vector<Accumulator>& accs) const {
    std::map<std::pair<double, IntVec>, std::uint64_t> merged;
    std::vector<std::int64_t> counts(levels_.size());
    IntVec cls(k_);
    auto add = [&](std::uint64_t c) {
      double len = 0.0;
      for (std::size_t l = 0; l < levels_.size(); ++l)
        len += static_cast<double>(counts[l]) * levels_[l];
      merged[{len, cls}] += c;
    };
    for (const auto& acc : accs) {
      if (dense_) {
        for (std::size_t idx = 0; idx < acc.dense.size(); ++idx) {
          if (acc.dense[idx] == 0) continue;
          std::uint64_t rest = idx;
          for (std::size_t d = strides_.size(); d-- > 0;) {
            const auto q = static_cast<std::int64_t>(rest / strides_[d]);
            rest %= strides_[d];
            if (d < levels_.size())
              counts[d] = q;
            else
              cls[d - levels_.size()] = q - offsets_[d];
          }
          add(acc.dense[idx]);
        }
      } else {
        for (const auto& [key, c] : acc.sparse) {
          for (std::size_t l = 0; l < levels_.size(); ++l) counts[l] = key.v[l];
          for (std::size_t i = 0; i < k_; ++i) cls[i] = key.v[levels_.size() + i];
          add(c);
        }
      }
    }
    std::vector<HistogramEntry> out;
    out.reserve(merged.size());
    for (auto& [key, c] : merged) out.push_back(HistogramEntry{key.first, key.second, c});
    return out;
  }

 private:
  static constexpr std::size_t kDenseCells = std::size_t{1} << 22;

  struct Walker {
    const OrbitSearch& s;
    Accumulator& acc;
    std::vector<std::size_t> word;
    std::vector<std::int64_t> counts;
    std::vector<std::int64_t> cls;
    double len = 0.0;
    std::uint64_t index = 0;
    std::size_t collect_depth = 0;
    std::vector<Task>* tasks = nullptr;

    Walker(const OrbitSearch& search, Accumulator& a)
        : s(search), acc(a), counts(search.levels_.size(), 0), cls(search.k_, 0) {
      word.reserve(search.n_max_ + 1);
      index = search.base_index_;
    }

    const SymbolicFlow::Edge& edge(std::size_t e) const { return s.flow_.edges()[e]; }

    double slack() const { return 1e-9 * (1.0 + s.t_); }

    void push_unchecked(std::size_t e) {
      word.push_back(e);
      const auto& ed = edge(e);
      len += ed.roof;
      ++counts[s.edge_level_[e]];
      for (std::size_t i = 0; i < s.k_; ++i) cls[i] += ed.f[i];
      if (s.dense_) index += static_cast<std::uint64_t>(s.edge_delta_[e]);
    }

    // Appends e if a closed completion can still fit under the cutoff.
    bool push(std::size_t e) {
      if (word.size() >= s.n_max_) return false;
      const auto& ed = edge(e);
      const std::size_t first_state = word.empty() ? ed.from : edge(word.front()).from;
      const auto ns = s.flow_.num_states();
      if (len + ed.roof + s.dist_[ed.to * ns + first_state] > s.t_ + slack()) return false;
      push_unchecked(e);
      return true;
    }

    void pop() {
      const auto e = word.back();
      word.pop_back();
      const auto& ed = edge(e);
      len -= ed.roof;
      --counts[s.edge_level_[e]];
      for (std::size_t i = 0; i < s.k_; ++i) cls[i] -= ed.f[i];
      if (s.dense_) index -= static_cast<std::uint64_t>(s.edge_delta_[e]);
    }

    void emit() {
      double exact = 0.0;
      for (std::size_t l = 0; l < s.levels_.size(); ++l)
        exact += static_cast<double>(counts[l]) * s.levels_[l];
      if (exact > s.t_) return;
      if (s.dense_) {
        ++acc.dense[index];
      } else {
        Key key;
        for (std::size_t l = 0; l < s.levels_.size(); ++l)
          key.v[l] = static_cast<std::int32_t>(counts[l]);
        for (std::size_t i = 0; i < s.k_; ++i)
          key.v[s.levels_.size() + i] = static_cast<std::int32_t>(cls[i]);
        ++acc.sparse[key];
      }
    }

    void extend(std::size_t p) {
      const std::size_t t = word.size();
      if (tasks != nullptr && t == collect_depth) {
        tasks->push_back(Task{word, p});
        return;
      }
      if (p == t && edge(word.back()).to == edge(word.front()).from) emit();
      if (t >= s.n_max_) return;
      const std::size_t floor_edge = word[t - p];
      for (auto e : s.out_[edge(word.back()).to]) {
        if (e < floor_edge) continue;
        if (!push(e)) continue;
        extend(e == floor_edge ? p : t + 1);
        pop();
      }
    }
  };

  const SymbolicFlow& flow_;
  double t_;
  std::size_t n_max_;
  std::size_t k_;
  std::vector<double> levels_;
  std::vector<std::size_t> edge_level_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<double> dist_;
  std::vector<std::uint64_t> strides_;
  std::vector<std::int64_t> dims_;
  std::vector<std::int64_t> offsets_;
  bool dense_ = false;
  std::size_t cells_ = 0;
  std::uint64_t base_index_ = 0;
  std::vector<std::int64_t> edge_delta_;
};

}  // namespace

OrbitHistogram enumerate_orbits(const SymbolicFlow& flow, double t, const EnumerationOptions& opts) {
  if (!(t > 0) || !std::isfinite(t)) throw InputError("enumerate_orbits: T must be positive");
  if (!flow.report().irreducible)
    throw InputError("enumerate_orbits: flow '" + flow.name() + "' is not irreducible");
  const auto n_max = word_length_bound(flow, t);
  if (n_max > opts.budget)
    throw ResourceError("enumerate_orbits: word-length bound " +
                        (n_max == std::numeric_limits<std::size_t>::max()
                             ? std::string("(overflow)")
                             : std::to_string(n_max)) +
                        " at T = " + format_double(t) + " exceeds budget " +
                        std::to_string(opts.budget));

  OrbitSearch search(flow, t, n_max);
  unsigned threads = opts.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                       : opts.threads;
  std::vector<OrbitSearch::Accumulator> accs;
  if (threads <= 1 || n_max < 8) {
    accs.push_back(search.make_accumulator());
    search.run_all(accs.back());
  } else {
    accs.push_back(search.make_accumulator());
    std::size_t depth = 1;
    auto tasks = std::vector<OrbitSearch::Task>{};
    // Deepen the split until there is enough work to balance.
    for (;; ++depth) {
      auto probe = search.make_accumulator();
      tasks = search.split(depth, probe);
      if (tasks.size() >= 16u * threads || depth + 2 >= n_max) {
        accs.front() = std::move(probe);
        break;
      }
    }
    std::atomic<std::size_t> next{0};
    std::vector<OrbitSearch::Accumulator> local(threads);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) {
      local[w] = search.make_accumulator();
      pool.emplace_back([&, w] {
        for (;;) {
          const auto i = next.fetch_add(1);
          if (i >= tasks.size()) break;
          search.run_task(tasks[i], local[w]);
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& a : local) accs.push_back(std::move(a));
  }
  return OrbitHistogram(flow.rank(), t, search.collect(accs));
}

// ---------------------------------------------------------------------------
// Closed-walk counts by dynamic programming over (state, class).

std::map<IntVec, std::uint64_t> transfer_count(const SymbolicFlow& flow, std::size_t n,
                                               std::optional<std::int64_t> box) {
  if (n == 0) throw InputError("transfer_count: n must be positive");
  const auto k = flow.rank();
  std::int64_t fmax = 0;
  for (const auto& e : flow.edges())
    for (auto v : e.f) fmax = std::max<std::int64_t>(fmax, std::abs(v));
  const std::int64_t need = fmax * static_cast<std::int64_t>(n);
  const std::int64_t b = box.value_or(need);
  if (b < need)
    throw InputError("transfer_count: box " + std::to_string(b) +
                     " clips reachable classes (need " + std::to_string(need) + ")");

  // Walk counts are bounded by (max out-degree)^n.
  std::size_t max_out = 0;
  {
    std::vector<std::size_t> deg(flow.num_states(), 0);
    for (const auto& e : flow.edges()) ++deg[e.from];
    max_out = *std::max_element(deg.begin(), deg.end());
  }
  if (static_cast<double>(n) * std::log2(static_cast<double>(std::max<std::size_t>(max_out, 1))) >= 63.0)
    throw ResourceError("transfer_count: walk counts at n = " + std::to_string(n) +
                        " may overflow 64 bits");

  const std::int64_t width = 2 * b + 1;
  std::size_t cells = 1;
  for (std::size_t i = 0; i < k; ++i) cells *= static_cast<std::size_t>(width);
  const auto ns = flow.num_states();
  if (static_cast<double>(cells) * static_cast<double>(ns) > 5e8)
    throw ResourceError("transfer_count: state-class table too large");

  std::vector<std::int64_t> stride(k, 1);
  for (std::size_t i = 1; i < k; ++i) stride[i] = stride[i - 1] * width;
  std::int64_t origin = 0;
  for (std::size_t i = 0; i < k; ++i) origin += b * stride[i];
  std::vector<std::int64_t> shift;
  for (const auto& e : flow.edges()) {
    std::int64_t d = 0;
    for (std::size_t i = 0; i < k; ++i) d += e.f[i] * stride[i];
    shift.push_back(d);
  }

  std::vector<std::uint64_t> totals(cells, 0);
  std::vector<std::uint64_t> cur(ns * cells), nxt(ns * cells);
  for (std::size_t start = 0; start < ns; ++start) {
    std::fill(cur.begin(), cur.end(), 0);
    cur[start * cells + static_cast<std::size_t>(origin)] = 1;
    for (std::size_t step = 0; step < n; ++step) {
      std::fill(nxt.begin(), nxt.end(), 0);
      for (std::size_t ei = 0; ei < flow.edges().size(); ++ei) {
        const auto& e = flow.edges()[ei];
        const std::uint64_t* src = &cur[e.from * cells];
        std::uint64_t* dst = &nxt[e.to * cells];
        const std::int64_t d = shift[ei];
        const std::int64_t lo = std::max<std::int64_t>(0, -d);
        const std::int64_t hi = std::min<std::int64_t>(static_cast<std::int64_t>(cells), static_cast<std::int64_t>(cells) - d);
        for (std::int64_t c = lo; c < hi; ++c)
          if (src[c]) dst[c + d] += src[c];
      }
      std::swap(cur, nxt);
    }
    for (std::size_t c = 0; c < cells; ++c) totals[c] += cur[start * cells + c];
  }

  std::map<IntVec, std::uint64_t> out;
  IntVec cls(k);
  for (std::size_t c = 0; c < cells; ++c) {
    if (totals[c] == 0) continue;
    auto rest = static_cast<std::int64_t>(c);
    for (std::size_t i = k; i-- > 0;) {
      cls[i] = rest / stride[i] - b;
      rest %= stride[i];
    }
    out[cls] = totals[c];
  }
  return out;
}

}  // namespace homdim
