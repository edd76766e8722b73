#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lattice.hpp"
#include "symbolic_model.hpp"

namespace fixture {

inline homdim::SetSpec spec(std::string kind) {
  homdim::SetSpec s;
  s.kind = std::move(kind);
  return s;
}
inline homdim::SetSpec power(int q) {
  auto s = spec("power");
  s.q = q;
  return s;
}
inline homdim::SetSpec digit(int base, std::vector<int> digits, bool symmetric = true) {
  auto s = spec("digit");
  s.base = base;
  s.digits = std::move(digits);
  s.symmetric = symmetric;
  return s;
}
inline homdim::SetSpec residue(std::int64_t m, std::int64_t r) {
  auto s = spec("residue");
  s.modulus = m;
  s.residue = r;
  return s;
}
inline homdim::SetSpec single(homdim::IntVec p = {}) {
  auto s = spec("single");
  s.point = std::move(p);
  return s;
}
inline homdim::SetSpec slab(int j) {
  auto s = spec("slab");
  s.j = j;
  return s;
}
inline homdim::SetSpec product(std::vector<homdim::SetSpec> fs) {
  auto s = spec("product");
  s.factors = std::move(fs);
  return s;
}
inline homdim::SetSpec complement(homdim::SetSpec inner) {
  auto s = spec("complement");
  s.factors = {std::move(inner)};
  return s;
}

inline homdim::SymbolicFlow flow(const std::string& name) {
  return homdim::SymbolicFlow(homdim::builtin_flow(name));
}

// Two-state flow with the given edges; all roofs 1 unless stated.
inline homdim::FlowSpec graph(std::size_t k, std::vector<std::string> states,
                              std::vector<homdim::FlowEdgeSpec> edges) {
  homdim::FlowSpec f;
  f.name = "test";
  f.k = k;
  f.states = std::move(states);
  f.edges = std::move(edges);
  return f;
}

}  // namespace fixture
