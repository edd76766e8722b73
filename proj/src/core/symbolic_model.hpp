#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lattice.hpp"

namespace homdim {

struct FlowEdgeSpec {
  std::string from;
  std::string to;
  double roof = 1.0;
  IntVec f;

  bool operator==(const FlowEdgeSpec&) const = default;
};

// Suspension flow over a subshift of finite type, as written in a flow file.
struct FlowSpec {
  std::string name;
  std::size_t k = 0;
  std::vector<std::string> states;
  std::vector<FlowEdgeSpec> edges;

  bool operator==(const FlowSpec&) const = default;
};

struct ValidationReport {
  bool irreducible = false;
  bool aperiodic = false;
  std::size_t period = 0;  // gcd of cycle word lengths (0 if no cycles)
  double r_min = 0.0;
};

class SymbolicFlow {
 public:
  struct Edge {
    std::size_t from = 0;
    std::size_t to = 0;
    double roof = 1.0;
    IntVec f;
  };

  explicit SymbolicFlow(FlowSpec spec);

  const FlowSpec& spec() const { return spec_; }
  const std::string& name() const { return spec_.name; }
  std::size_t rank() const { return spec_.k; }
  std::size_t num_states() const { return spec_.states.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  const ValidationReport& report() const { return report_; }
  double r_min() const { return report_.r_min; }
  bool constant_roof() const;

 private:
  FlowSpec spec_;
  std::vector<Edge> edges_;
  ValidationReport report_;
};

ValidationReport validate(const SymbolicFlow& flow);

// Bundled reference models (full shifts presented as one-state bouquets,
// plus weak-mixing variants with an irrational roof).
FlowSpec builtin_flow(std::string_view name);
std::vector<std::string> builtin_flow_names();

struct HistogramEntry {
  double length = 0.0;
  IntVec cls;
  std::uint64_t count = 0;

  bool operator==(const HistogramEntry&) const = default;
};

// Exact multiset of (length, class) over primitive periodic orbits with
// length <= t_max, sorted by (length, class).
class OrbitHistogram {
 public:
  OrbitHistogram(std::size_t k, double t_max, std::vector<HistogramEntry> entries);

  std::size_t rank() const { return k_; }
  double t_max() const { return t_max_; }
  const std::vector<HistogramEntry>& entries() const { return entries_; }

  std::uint64_t total(double t) const;
  std::uint64_t count_by_class(std::span<const std::int64_t> alpha, double t) const;
  std::uint64_t count_set(const LatticeSet& a, double t) const;
  // Per-class counts over lengths <= t.
  std::map<IntVec, std::uint64_t> class_counts(double t) const;
  OrbitHistogram restricted(double t) const;

  // CSV: length, class_1..class_k, count.
  std::string to_csv() const;

 private:
  void check_range(double t) const;

  std::size_t k_;
  double t_max_;
  std::vector<HistogramEntry> entries_;
};

struct EnumerationOptions {
  std::size_t budget = 40;  // max word length
  unsigned threads = 1;     // 0 = hardware concurrency
};

// Largest word length an orbit of length <= t can have.
std::size_t word_length_bound(const SymbolicFlow& flow, double t);

OrbitHistogram enumerate_orbits(const SymbolicFlow& flow, double t,
                                const EnumerationOptions& opts = {});

// Closed edge-walks of word length n, keyed by class. `box` bounds every
// class coordinate; it defaults to the smallest box that cannot clip.
std::map<IntVec, std::uint64_t> transfer_count(const SymbolicFlow& flow, std::size_t n,
                                               std::optional<std::int64_t> box = std::nullopt);

}  // namespace homdim
