#include "config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "errors.hpp"
#include "format.hpp"

namespace homdim {

namespace {

std::string at_line(const YAML::Node& n) {
  const auto m = n.Mark();
  if (m.is_null()) return "";
  return " (line " + std::to_string(m.line + 1) + ")";
}

[[noreturn]] void fail(const std::string& path, const YAML::Node& n, const std::string& what) {
  throw InputError(path + at_line(n) + ": " + what);
}

YAML::Node load_yaml(std::string_view text) {
  try {
    return YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw InputError("parse error at line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
}

void require_map(const YAML::Node& n, const std::string& path) {
  if (!n.IsMap()) fail(path, n, "expected a mapping");
}

// Rejects keys outside `allowed`, naming the offending key and its line.
void check_keys(const YAML::Node& n, const std::string& path, const std::set<std::string>& allowed) {
  require_map(n, path);
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      throw InputError((path.empty() ? std::string("config") : path) + at_line(kv.first) +
                       ": unknown key '" + key + "' (allowed: " + list + ")");
    }
  }
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

template <class T>
T scalar(const YAML::Node& n, const std::string& path, const char* what) {
  if (!n.IsScalar()) fail(path, n, std::string("expected ") + what);
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    fail(path, n, std::string("expected ") + what + ", got '" + n.Scalar() + "'");
  }
}

double real(const YAML::Node& n, const std::string& path) {
  const double v = scalar<double>(n, path, "a number");
  if (!std::isfinite(v)) fail(path, n, "must be finite");
  return v;
}

std::int64_t integer(const YAML::Node& n, const std::string& path) {
  return scalar<std::int64_t>(n, path, "an integer");
}

std::size_t count(const YAML::Node& n, const std::string& path) {
  const auto v = integer(n, path);
  if (v < 0) fail(path, n, "must be nonnegative");
  return static_cast<std::size_t>(v);
}

bool boolean(const YAML::Node& n, const std::string& path) {
  return scalar<bool>(n, path, "true or false");
}

std::string text(const YAML::Node& n, const std::string& path) {
  return scalar<std::string>(n, path, "a string");
}

IntVec int_list(const YAML::Node& n, const std::string& path) {
  if (!n.IsSequence()) fail(path, n, "expected a list of integers");
  IntVec out;
  for (std::size_t i = 0; i < n.size(); ++i)
    out.push_back(integer(n[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

RealVec real_list(const YAML::Node& n, const std::string& path) {
  if (!n.IsSequence()) fail(path, n, "expected a list of numbers");
  RealVec out;
  for (std::size_t i = 0; i < n.size(); ++i)
    out.push_back(real(n[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

// A grid is a list, {from, to, step} or {from, to, points, spacing}.
RealVec grid(const YAML::Node& n, const std::string& path) {
  if (n.IsSequence()) return real_list(n, path);
  check_keys(n, path, {"from", "to", "step", "points", "spacing"});
  if (!n["from"] || !n["to"]) fail(path, n, "grid needs 'from' and 'to'");
  const double from = real(n["from"], join(path, "from"));
  const double to = real(n["to"], join(path, "to"));
  if (!(to >= from)) fail(join(path, "to"), n["to"], "must be >= from");
  if (n["step"]) {
    if (n["points"] || n["spacing"]) fail(path, n, "use either 'step' or 'points', not both");
    const double step = real(n["step"], join(path, "step"));
    if (!(step > 0.0)) fail(join(path, "step"), n["step"], "must be positive");
    const double span = (to - from) / step;
    if (span > 1e6) fail(path, n, "grid has more than 10^6 points");
    RealVec out;
    for (std::size_t i = 0; static_cast<double>(i) <= span * (1.0 + 1e-12); ++i)
      out.push_back(from + static_cast<double>(i) * step);
    return out;
  }
  if (!n["points"]) fail(path, n, "grid needs 'step' or 'points'");
  const auto pts = count(n["points"], join(path, "points"));
  if (pts < 2 || pts > 1000000) fail(join(path, "points"), n["points"], "must lie in [2, 10^6]");
  const std::string spacing = n["spacing"] ? text(n["spacing"], join(path, "spacing")) : "linear";
  if (spacing == "log") {
    if (!(from > 0.0)) fail(join(path, "from"), n["from"], "log spacing needs from > 0");
    return log_grid(from, to, pts);
  }
  if (spacing != "linear") fail(join(path, "spacing"), n["spacing"], "expected linear or log");
  RealVec out(pts);
  for (std::size_t i = 0; i < pts; ++i)
    out[i] = from + (to - from) * static_cast<double>(i) / static_cast<double>(pts - 1);
  out.back() = to;
  return out;
}

// ---------------------------------------------------------------------------
// flow

FlowSpec flow_from_node(const YAML::Node& n, const std::string& path) {
  check_keys(n, path, {"name", "k", "states", "edges"});
  FlowSpec f;
  f.name = n["name"] ? text(n["name"], join(path, "name")) : "custom";
  if (!n["k"]) fail(path, n, "missing 'k'");
  f.k = count(n["k"], join(path, "k"));
  if (f.k == 0) fail(join(path, "k"), n["k"], "must be >= 1");
  if (!n["states"] || !n["states"].IsSequence() || n["states"].size() == 0)
    fail(join(path, "states"), n["states"] ? n["states"] : n, "expected a nonempty list of names");
  std::set<std::string> known;
  for (std::size_t i = 0; i < n["states"].size(); ++i) {
    const auto p = join(path, "states") + "[" + std::to_string(i) + "]";
    auto s = text(n["states"][i], p);
    if (!known.insert(s).second) fail(p, n["states"][i], "duplicate state '" + s + "'");
    f.states.push_back(std::move(s));
  }
  if (!n["edges"] || !n["edges"].IsSequence() || n["edges"].size() == 0)
    fail(join(path, "edges"), n["edges"] ? n["edges"] : n, "expected a nonempty list of edges");
  for (std::size_t i = 0; i < n["edges"].size(); ++i) {
    const auto& en = n["edges"][i];
    const auto p = join(path, "edges") + "[" + std::to_string(i) + "]";
    check_keys(en, p, {"from", "to", "roof", "f"});
    for (const char* req : {"from", "to", "roof", "f"})
      if (!en[req]) fail(p, en, std::string("missing '") + req + "'");
    FlowEdgeSpec e;
    e.from = text(en["from"], join(p, "from"));
    e.to = text(en["to"], join(p, "to"));
    if (!known.count(e.from)) fail(join(p, "from"), en["from"], "unknown state '" + e.from + "'");
    if (!known.count(e.to)) fail(join(p, "to"), en["to"], "unknown state '" + e.to + "'");
    e.roof = real(en["roof"], join(p, "roof"));
    if (!(e.roof > 0.0))
      fail(join(p, "roof"), en["roof"], "edge " + std::to_string(i) + " (" + e.from + " -> " +
                                            e.to + ") has nonpositive roof " + format_double(e.roof));
    e.f = int_list(en["f"], join(p, "f"));
    if (e.f.size() != f.k)
      fail(join(p, "f"), en["f"], "cocycle has " + std::to_string(e.f.size()) +
                                      " entries, expected k = " + std::to_string(f.k));
    f.edges.push_back(std::move(e));
  }
  try {
    SymbolicFlow check(f);
  } catch (const Error& e) {
    fail(path, n, e.what());
  }
  return f;
}

// ---------------------------------------------------------------------------
// set

SetSpec set_from_node(const YAML::Node& n, const std::string& path) {
  require_map(n, path);
  if (!n["kind"]) fail(path, n, "missing 'kind'");
  SetSpec s;
  s.kind = text(n["kind"], join(path, "kind"));
  std::set<std::string> allowed{"kind", "shift", "delta"};
  if (s.kind == "full") {
  } else if (s.kind == "single") {
    allowed.insert("point");
  } else if (s.kind == "finite") {
    allowed.insert("points");
  } else if (s.kind == "power") {
    allowed.insert("q");
  } else if (s.kind == "digit") {
    allowed.insert({"base", "digits", "symmetric"});
  } else if (s.kind == "residue") {
    allowed.insert({"modulus", "residue"});
  } else if (s.kind == "product") {
    allowed.insert("factors");
  } else if (s.kind == "slab") {
    allowed.insert("j");
  } else if (s.kind == "complement") {
    allowed.insert("operand");
  } else {
    fail(join(path, "kind"), n["kind"],
         "unknown set kind '" + s.kind +
             "' (expected full, single, finite, power, digit, residue, product, slab, complement)");
  }
  check_keys(n, path, allowed);

  if (n["shift"]) s.shift = int_list(n["shift"], join(path, "shift"));
  if (n["delta"]) s.delta = real(n["delta"], join(path, "delta"));
  if (n["point"]) s.point = int_list(n["point"], join(path, "point"));
  if (n["points"]) {
    const auto& pn = n["points"];
    if (!pn.IsSequence()) fail(join(path, "points"), pn, "expected a list of points");
    for (std::size_t i = 0; i < pn.size(); ++i) {
      const auto p = join(path, "points") + "[" + std::to_string(i) + "]";
      s.points.push_back(pn[i].IsSequence() ? int_list(pn[i], p) : IntVec{integer(pn[i], p)});
    }
  }
  if (s.kind == "power") {
    if (!n["q"]) fail(path, n, "power set needs 'q'");
    const auto q = integer(n["q"], join(path, "q"));
    if (q < 1 || q > 62) fail(join(path, "q"), n["q"], "q must lie in [1, 62]");
    s.q = static_cast<int>(q);
  }
  if (s.kind == "digit") {
    if (!n["base"] || !n["digits"]) fail(path, n, "digit set needs 'base' and 'digits'");
    const auto b = integer(n["base"], join(path, "base"));
    if (b < 2 || b > 1000) fail(join(path, "base"), n["base"], "base must lie in [2, 1000]");
    s.base = static_cast<int>(b);
    const auto d = int_list(n["digits"], join(path, "digits"));
    for (std::size_t i = 0; i < d.size(); ++i)
      if (d[i] < 0 || d[i] >= b)
        fail(join(path, "digits") + "[" + std::to_string(i) + "]", n["digits"][i],
             "digit " + std::to_string(d[i]) + " outside {0.." + std::to_string(b - 1) + "}");
    s.digits.assign(d.begin(), d.end());
    if (n["symmetric"]) s.symmetric = boolean(n["symmetric"], join(path, "symmetric"));
  }
  if (s.kind == "residue") {
    if (!n["modulus"]) fail(path, n, "residue set needs 'modulus'");
    s.modulus = integer(n["modulus"], join(path, "modulus"));
    if (s.modulus < 1) fail(join(path, "modulus"), n["modulus"], "modulus must be >= 1");
    if (n["residue"]) s.residue = integer(n["residue"], join(path, "residue"));
  }
  if (s.kind == "slab") {
    if (!n["j"]) fail(path, n, "slab needs 'j'");
    const auto j = integer(n["j"], join(path, "j"));
    if (j < 0 || j > 64) fail(join(path, "j"), n["j"], "j out of range");
    s.j = static_cast<int>(j);
  }
  if (s.kind == "product") {
    const auto& fn = n["factors"];
    if (!fn || !fn.IsSequence() || fn.size() == 0)
      fail(join(path, "factors"), fn ? fn : n, "expected a nonempty list of factor sets");
    for (std::size_t i = 0; i < fn.size(); ++i)
      s.factors.push_back(set_from_node(fn[i], join(path, "factors") + "[" + std::to_string(i) + "]"));
  }
  if (s.kind == "complement") {
    if (!n["operand"]) fail(path, n, "complement needs 'operand'");
    s.factors.push_back(set_from_node(n["operand"], join(path, "operand")));
  }
  return s;
}

// ---------------------------------------------------------------------------

void set_path(YAML::Node node, const std::vector<std::string>& parts, std::size_t i,
              const YAML::Node& value) {
  if (i + 1 == parts.size()) {
    node[parts[i]] = value;
    return;
  }
  YAML::Node child = node[parts[i]];
  if (child && !child.IsMap())
    throw InputError("override: '" + parts[i] + "' is not a section");
  set_path(child, parts, i + 1, value);
}

void apply_overrides(YAML::Node& root, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0)
      throw InputError("override '" + o + "': expected key=value");
    const std::string key = o.substr(0, eq);
    std::vector<std::string> parts;
    std::stringstream ss(key);
    for (std::string p; std::getline(ss, p, '.');) {
      if (p.empty()) throw InputError("override '" + o + "': empty key component");
      parts.push_back(p);
    }
    YAML::Node value;
    try {
      value = YAML::Load(o.substr(eq + 1));
    } catch (const YAML::ParserException& e) {
      throw InputError("override '" + o + "': " + e.msg);
    }
    if (!root.IsMap() && !root.IsNull()) throw InputError("config root must be a mapping");
    set_path(root, parts, 0, value);
  }
}

ExperimentConfig config_from_node(const YAML::Node& root, const std::filesystem::path& base_dir) {
  check_keys(root, "", {"flow", "set", "experiment", "dimension"});
  ExperimentConfig c;
  if (!root["flow"]) throw InputError("config: missing 'flow' section");
  const auto& fn = root["flow"];
  require_map(fn, "flow");
  if (fn["model"]) {
    check_keys(fn, "flow", {"model"});
    const auto name = text(fn["model"], "flow.model");
    try {
      c.flow = builtin_flow(name);
    } catch (const Error& e) {
      fail("flow.model", fn["model"], e.what());
    }
    c.flow_source = "builtin:" + name;
  } else if (fn["file"]) {
    check_keys(fn, "flow", {"file"});
    std::filesystem::path p = text(fn["file"], "flow.file");
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    c.flow = load_flow(p);
    c.flow_source = p.string();
  } else {
    c.flow = flow_from_node(fn, "flow");
    c.flow_source = "inline";
  }

  if (root["set"]) {
    c.set = set_from_node(root["set"], "set");
  } else {
    c.set.kind = "full";
  }
  try {
    (void)make_set(c.set, c.flow.k);
  } catch (const Error& e) {
    fail("set", root["set"] ? root["set"] : root, e.what());
  }

  if (const auto& en = root["experiment"]) {
    check_keys(en, "experiment",
               {"T_grid", "predict_T_grid", "eta", "enforce_vanishing_winding", "winding_tol",
                "budget", "threads", "output"});
    if (en["T_grid"]) c.t_grid = grid(en["T_grid"], "experiment.T_grid");
    if (en["predict_T_grid"]) c.predict_t_grid = grid(en["predict_T_grid"], "experiment.predict_T_grid");
    if (en["eta"]) c.eta = real(en["eta"], "experiment.eta");
    if (en["enforce_vanishing_winding"])
      c.enforce_vanishing_winding = boolean(en["enforce_vanishing_winding"], "experiment.enforce_vanishing_winding");
    if (en["winding_tol"]) c.winding_tol = real(en["winding_tol"], "experiment.winding_tol");
    if (en["budget"]) c.budget = count(en["budget"], "experiment.budget");
    if (en["threads"]) c.threads = static_cast<unsigned>(count(en["threads"], "experiment.threads"));
    if (en["output"]) c.output = text(en["output"], "experiment.output");
  }
  if (const auto& dn = root["dimension"]) {
    check_keys(dn, "dimension", {"r_min", "r_max", "points", "norm", "matrix"});
    auto& d = c.dimension;
    if (dn["r_min"]) d.r_min = real(dn["r_min"], "dimension.r_min");
    if (dn["r_max"]) d.r_max = real(dn["r_max"], "dimension.r_max");
    if (dn["points"]) d.points = count(dn["points"], "dimension.points");
    if (dn["norm"]) d.norm = text(dn["norm"], "dimension.norm");
    if (dn["matrix"]) {
      const auto& mn = dn["matrix"];
      if (!mn.IsSequence()) fail("dimension.matrix", mn, "expected a list of rows");
      for (std::size_t i = 0; i < mn.size(); ++i)
        d.matrix.push_back(real_list(mn[i], "dimension.matrix[" + std::to_string(i) + "]"));
    }
  }
  validate_config(c);
  return c;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw IoError("cannot read '" + p.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string list_text(const IntVec& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_int(v[i]);
  return out + "]";
}

std::string list_text(const RealVec& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_double(v[i]);
  return out + "]";
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch;
  }
  return out + "\"";
}

// Inline flow-style mapping for a set spec.
std::string set_inline(const SetSpec& s) {
  std::string out = "{kind: " + s.kind;
  if (s.kind == "single" && !s.point.empty()) out += ", point: " + list_text(s.point);
  if (s.kind == "finite") {
    out += ", points: [";
    for (std::size_t i = 0; i < s.points.size(); ++i) out += (i ? ", " : "") + list_text(s.points[i]);
    out += "]";
  }
  if (s.kind == "power") out += ", q: " + std::to_string(s.q);
  if (s.kind == "digit") {
    out += ", base: " + std::to_string(s.base) + ", digits: [";
    for (std::size_t i = 0; i < s.digits.size(); ++i) out += (i ? ", " : "") + std::to_string(s.digits[i]);
    out += "], symmetric: ";
    out += s.symmetric ? "true" : "false";
  }
  if (s.kind == "residue")
    out += ", modulus: " + format_int(s.modulus) + ", residue: " + format_int(s.residue);
  if (s.kind == "slab") out += ", j: " + std::to_string(s.j);
  if (s.kind == "product") {
    out += ", factors: [";
    for (std::size_t i = 0; i < s.factors.size(); ++i) out += (i ? ", " : "") + set_inline(s.factors[i]);
    out += "]";
  }
  if (s.kind == "complement" && !s.factors.empty()) out += ", operand: " + set_inline(s.factors[0]);
  if (!s.shift.empty()) out += ", shift: " + list_text(s.shift);
  if (s.delta) out += ", delta: " + format_double(*s.delta);
  return out + "}";
}

void write_flow_body(std::ostringstream& out, const FlowSpec& f, const std::string& indent) {
  out << indent << "name: " << quoted(f.name) << "\n";
  out << indent << "k: " << f.k << "\n";
  out << indent << "states: [";
  for (std::size_t i = 0; i < f.states.size(); ++i) out << (i ? ", " : "") << quoted(f.states[i]);
  out << "]\n";
  out << indent << "edges:\n";
  for (const auto& e : f.edges)
    out << indent << "  - {from: " << quoted(e.from) << ", to: " << quoted(e.to)
        << ", roof: " << format_double(e.roof) << ", f: " << list_text(e.f) << "}\n";
}

}  // namespace

ExperimentConfig parse_config(std::string_view txt, const std::filesystem::path& base_dir,
                              const std::vector<std::string>& overrides) {
  YAML::Node root = load_yaml(txt);
  if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  apply_overrides(root, overrides);
  return config_from_node(root, base_dir);
}

ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides) {
  const auto txt = read_file(path);
  try {
    return parse_config(txt, path.parent_path(), overrides);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

FlowSpec parse_flow(std::string_view txt) { return flow_from_node(load_yaml(txt), "flow"); }

FlowSpec load_flow(const std::filesystem::path& path) {
  const auto txt = read_file(path);
  try {
    return parse_flow(txt);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

FlowSpec resolve_flow(const std::string& name_or_path) {
  for (const auto& b : builtin_flow_names())
    if (b == name_or_path) return builtin_flow(b);
  if (!std::filesystem::exists(name_or_path)) {
    std::string names;
    for (const auto& b : builtin_flow_names()) names += (names.empty() ? "" : ", ") + b;
    throw InputError("'" + name_or_path + "' is neither a builtin model (" + names +
                     ") nor an existing flow file");
  }
  return load_flow(name_or_path);
}

SetSpec parse_set(std::string_view txt) { return set_from_node(load_yaml(txt), "set"); }

std::string serialize_flow(const FlowSpec& flow) {
  std::ostringstream out;
  write_flow_body(out, flow, "");
  return out.str();
}

std::string serialize_set(const SetSpec& set) { return set_inline(set) + "\n"; }

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "flow:\n";
  write_flow_body(out, c.flow, "  ");
  out << "set: " << set_inline(c.set) << "\n";
  out << "experiment:\n";
  out << "  T_grid: " << list_text(c.t_grid) << "\n";
  out << "  predict_T_grid: " << list_text(c.predict_t_grid) << "\n";
  out << "  eta: " << format_double(c.eta) << "\n";
  out << "  enforce_vanishing_winding: " << (c.enforce_vanishing_winding ? "true" : "false") << "\n";
  out << "  winding_tol: " << format_double(c.winding_tol) << "\n";
  out << "  budget: " << c.budget << "\n";
  out << "  threads: " << c.threads << "\n";
  out << "  output: " << quoted(c.output) << "\n";
  const auto& d = c.dimension;
  out << "dimension:\n";
  out << "  r_min: " << format_double(d.r_min) << "\n";
  out << "  r_max: " << format_double(d.r_max) << "\n";
  out << "  points: " << d.points << "\n";
  out << "  norm: " << d.norm << "\n";
  if (!d.matrix.empty()) {
    out << "  matrix: [";
    for (std::size_t i = 0; i < d.matrix.size(); ++i) out << (i ? ", " : "") << list_text(d.matrix[i]);
    out << "]\n";
  }
  return out.str();
}

}  // namespace homdim
