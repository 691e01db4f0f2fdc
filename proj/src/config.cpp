#include "qsfrac/config.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "qsfrac/error.hpp"
#include "qsfrac/hash.hpp"

namespace qsfrac {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

double to_double(const std::string& key, const std::string& s) {
  const std::string t = trim(s);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size() || !std::isfinite(v))
    throw ConfigError(key, "expected a finite number, got '" + s + "'");
  return v;
}

long to_long(const std::string& key, const std::string& s) {
  const std::string t = trim(s);
  long v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
    throw ConfigError(key, "expected an integer, got '" + s + "'");
  return v;
}

std::vector<double> numbers(const std::string& key, const std::string& s) {
  std::string t = s;
  std::replace(t.begin(), t.end(), ',', ' ');
  std::istringstream is(t);
  std::vector<double> out;
  std::string tok;
  while (is >> tok) out.push_back(to_double(key, tok));
  return out;
}

std::string join(const std::vector<double>& v, const char* sep = " ") {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + format_double(v[i]);
  return out;
}

using Normalizer = std::function<std::string(const std::string& key, const std::string& value)>;

struct KeySpec {
  std::string def;
  Normalizer norm;
};

Normalizer real(std::function<bool(double)> ok, const char* rule) {
  return [ok, rule](const std::string& k, const std::string& v) {
    const double x = to_double(k, v);
    if (!ok(x)) throw ConfigError(k, std::string("value ") + trim(v) + " violates " + rule);
    return format_double(x);
  };
}

Normalizer whole(long min) {
  return [min](const std::string& k, const std::string& v) {
    const long x = to_long(k, v);
    if (x < min) throw ConfigError(k, "must be at least " + std::to_string(min));
    return std::to_string(x);
  };
}

Normalizer flag() {
  return [](const std::string& k, const std::string& v) -> std::string {
    const std::string t = lower(trim(v));
    if (t == "true" || t == "1" || t == "yes" || t == "on") return "true";
    if (t == "false" || t == "0" || t == "no" || t == "off") return "false";
    throw ConfigError(k, "expected true or false, got '" + v + "'");
  };
}

Normalizer choice(std::vector<std::string> options) {
  return [options](const std::string& k, const std::string& v) {
    const std::string t = lower(trim(v));
    for (const auto& o : options)
      if (lower(o) == t) return o;
    std::string all;
    for (const auto& o : options) all += (all.empty() ? "" : ", ") + o;
    throw ConfigError(k, "expected one of " + all + ", got '" + v + "'");
  };
}

Normalizer fixed_count(std::size_t n) {
  return [n](const std::string& k, const std::string& v) {
    const auto x = numbers(k, v);
    if (x.size() != n) throw ConfigError(k, "expected " + std::to_string(n) + " numbers");
    return join(x);
  };
}

Normalizer table() {
  return [](const std::string& k, const std::string& v) {
    const LoadTable t = parse_load_table(k, v);
    std::string out;
    for (const auto& [a, b] : t.knots()) out += (out.empty() ? "" : ", ") + format_double(a) + ":" + format_double(b);
    return out;
  };
}

Normalizer boxes() {
  return [](const std::string& k, const std::string& v) -> std::string {
    const std::string t = lower(trim(v));
    if (t.empty() || t == "none") return "none";
    if (t == "all") return "all";
    std::string out;
    std::istringstream is(v);
    std::string part;
    while (std::getline(is, part, ';')) {
      if (trim(part).empty()) continue;
      const auto x = numbers(k, part);
      if (x.size() != 4) throw ConfigError(k, "each box needs four numbers x0 y0 x1 y1");
      if (x[2] < x[0] || x[3] < x[1]) throw ConfigError(k, "box corners must satisfy x0 <= x1 and y0 <= y1");
      out += (out.empty() ? "" : "; ") + join(x);
    }
    return out.empty() ? "none" : out;
  };
}

Normalizer id_list() {
  return [](const std::string& k, const std::string& v) {
    std::string t = v;
    std::replace(t.begin(), t.end(), ',', ' ');
    std::istringstream is(t);
    std::vector<long> ids;
    std::string tok;
    while (is >> tok) {
      const long x = to_long(k, tok);
      if (x < 0) throw ConfigError(k, "edge ids are nonnegative");
      ids.push_back(x);
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    std::string out;
    for (long x : ids) out += (out.empty() ? "" : " ") + std::to_string(x);
    return out;
  };
}

Normalizer time_list() {
  return [](const std::string& k, const std::string& v) {
    const auto x = numbers(k, v);
    for (std::size_t i = 1; i < x.size(); ++i)
      if (!(x[i] > x[i - 1])) throw ConfigError(k, "times must be strictly increasing");
    if (!x.empty() && x.front() != 0.0) throw ConfigError(k, "explicit grid must start at 0");
    if (x.size() == 1) throw ConfigError(k, "explicit grid needs at least two times");
    return join(x);
  };
}

Normalizer text() {
  return [](const std::string&, const std::string& v) { return trim(v); };
}

const std::map<std::string, KeySpec>& specs() {
  static const std::map<std::string, KeySpec> s = [] {
    auto pos = [](double x) { return x > 0.0; };
    auto nonneg = [](double x) { return x >= 0.0; };
    auto above1 = [](double x) { return x > 1.0; };
    auto any = [](double) { return true; };
    const std::vector<std::string> sides = {"dirichlet", "neumann", "surface_force"};
    std::map<std::string, KeySpec> m;
    m["version"] = {"1", [](const std::string& k, const std::string& v) {
                      if (trim(v) != "1") throw ConfigError(k, "unsupported config version '" + v + "'");
                      return std::string("1");
                    }};
    m["mesh.nx"] = {"2", whole(1)};
    m["mesh.ny"] = {"1", whole(1)};
    m["mesh.width"] = {"1", real(pos, "> 0")};
    m["mesh.height"] = {"1", real(pos, "> 0")};
    m["mesh.diagonal"] = {"single", choice({"single", "crossed"})};
    m["mesh.left"] = {"dirichlet", choice(sides)};
    m["mesh.right"] = {"dirichlet", choice(sides)};
    m["mesh.bottom"] = {"dirichlet", choice(sides)};
    m["mesh.top"] = {"dirichlet", choice(sides)};
    m["mesh.brittle"] = {"none", boxes()};
    m["energy.p"] = {"2", real(above1, "> 1")};
    m["energy.q"] = {"2", real(above1, "> 1")};
    m["energy.r"] = {"2", real(above1, "> 1")};
    m["energy.mu"] = {"1", real(pos, "> 0")};
    m["energy.epsilon"] = {"0", real(nonneg, ">= 0")};
    m["energy.lambda_f"] = {"1", real(nonneg, ">= 0")};
    m["energy.allow_nonconforming"] = {"false", flag()};
    m["energy.kappa.kind"] = {"isotropic", choice({"isotropic", "weighted_l1", "elliptic"})};
    m["energy.kappa.weights"] = {"1 1", fixed_count(2)};
    m["energy.kappa.gradient"] = {"1 0 0", fixed_count(3)};
    m["load.f.profile"] = {"1 0 0", fixed_count(3)};
    m["load.f.table"] = {"", table()};
    m["load.g.profile"] = {"1 0 0", fixed_count(3)};
    m["load.g.table"] = {"", table()};
    m["load.psi.profile"] = {"0 0 0", fixed_count(3)};
    m["load.psi.table"] = {"", table()};
    m["time.T"] = {"1", real(pos, "> 0")};
    m["time.knots"] = {"16", whole(1)};
    m["time.explicit"] = {"", time_list()};
    m["strategy.kind"] = {"BRUTE_FORCE", choice({"BRUTE_FORCE", "GREEDY", "GREEDY_WITH_PAIRS"})};
    m["strategy.max_edges"] = {"20", whole(0)};
    m["strategy.greedy_sweeps"] = {"1000", whole(1)};
    m["tol.solver"] = {"1e-10", real(pos, "> 0")};
    m["tol.energy"] = {"1e-9", real(pos, "> 0")};
    m["tol.residual"] = {"1e-08", real(pos, "> 0")};
    m["tol.balance"] = {"5e-3", real(pos, "> 0")};
    m["tol.fenchel"] = {"1e-08", real(pos, "> 0")};
    m["tol.jump"] = {"-1", real(any, "a number (negative selects the default)")};
    m["initial.crack"] = {"", id_list()};
    m["initial.override"] = {"false", flag()};
    m["output.record"] = {"", text()};
    m["output.csv"] = {"", text()};
    return m;
  }();
  return s;
}

BoundaryLabel side_label(const std::string& v) {
  if (v == "dirichlet") return BoundaryLabel::Dirichlet;
  if (v == "neumann") return BoundaryLabel::Neumann;
  return BoundaryLabel::SurfaceForce;
}

SpatialProfile profile_of(const std::string& v) {
  const auto x = numbers("", v);
  return SpatialProfile{x[0], x[1], x[2]};
}

}  // namespace

LoadTable parse_load_table(const std::string& key, const std::string& text) {
  std::vector<std::pair<double, double>> knots;
  std::istringstream is(text);
  std::string part;
  while (std::getline(is, part, ',')) {
    if (trim(part).empty()) continue;
    const auto colon = part.find(':');
    if (colon == std::string::npos) throw ConfigError(key, "table entries are written t:value");
    knots.emplace_back(to_double(key, part.substr(0, colon)), to_double(key, part.substr(colon + 1)));
  }
  if (knots.empty()) return LoadTable();
  for (std::size_t i = 1; i < knots.size(); ++i)
    if (!(knots[i].first > knots[i - 1].first)) throw ConfigError(key, "table times must be strictly increasing");
  return LoadTable(std::move(knots));
}

RunConfig::RunConfig() {
  for (const auto& [k, spec] : specs()) values_[k] = spec.norm(k, spec.def);
}

const std::vector<std::string>& RunConfig::known_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& kv : specs()) out.push_back(kv.first);
    return out;
  }();
  return keys;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const auto it = specs().find(key);
  if (it == specs().end()) throw ConfigError(key, "unknown key");
  values_[key] = it->second.norm(key, value);
}

const std::string& RunConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(key, "unknown key");
  return it->second;
}

bool RunConfig::has(const std::string& key) const { return values_.count(key) != 0; }

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  bool saw_version = false;
  std::map<std::string, int> seen;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("", "line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (seen.count(key)) throw ConfigError(key, "duplicate key (first on line " + std::to_string(seen[key]) + ")");
    seen[key] = lineno;
    cfg.set(key, line.substr(eq + 1));
    if (key == "version") saw_version = true;
  }
  if (!saw_version) throw ConfigError("version", "missing required key");
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string RunConfig::effective_text() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

std::uint64_t RunConfig::hash() const {
  Fnv1a h;
  for (const auto& [k, v] : values_) {
    if (k.rfind("output.", 0) == 0) continue;
    h.text(k);
    h.text("=");
    h.text(v);
    h.text("\n");
  }
  return h.digest();
}

double RunConfig::number(const std::string& key) const { return to_double(key, get(key)); }
int RunConfig::integer(const std::string& key) const { return static_cast<int>(to_long(key, get(key))); }
bool RunConfig::boolean(const std::string& key) const { return get(key) == "true"; }

Mesh RunConfig::build_mesh() const {
  Labeling lab;
  lab.left = side_label(get("mesh.left"));
  lab.right = side_label(get("mesh.right"));
  lab.bottom = side_label(get("mesh.bottom"));
  lab.top = side_label(get("mesh.top"));
  const double w = number("mesh.width"), h = number("mesh.height");
  const std::string& b = get("mesh.brittle");
  if (b == "all") {
    lab.brittle.push_back(Box{0.0, 0.0, w, h});
  } else if (b != "none") {
    std::istringstream is(b);
    std::string part;
    while (std::getline(is, part, ';')) {
      const auto x = numbers("mesh.brittle", part);
      lab.brittle.push_back(Box{x[0], x[1], x[2], x[3]});
    }
  }
  try {
    return build_structured_mesh(integer("mesh.nx"), integer("mesh.ny"), w, h, lab,
                                 get("mesh.diagonal") == "crossed" ? Diagonal::Crossed : Diagonal::Single);
  } catch (const ValidationError& e) {
    throw ConfigError("mesh", e.what());
  }
}

EnergyModel RunConfig::build_model(const Mesh& mesh) const {
  EnergyModel m;
  m.bulk = BulkLaw::uniform(mesh, number("energy.p"), number("energy.mu"), number("energy.epsilon"));
  const std::string& kind = get("energy.kappa.kind");
  m.toughness.kind = kind == "isotropic"   ? ToughnessKind::Isotropic
                     : kind == "weighted_l1" ? ToughnessKind::WeightedL1
                                             : ToughnessKind::Elliptic;
  const auto wts = numbers("energy.kappa.weights", get("energy.kappa.weights"));
  m.toughness.a = wts[0];
  m.toughness.b = wts[1];
  m.toughness.factor = profile_of(get("energy.kappa.gradient"));
  m.body.amplitude = parse_load_table("load.f.table", get("load.f.table"));
  m.body.profile = profile_of(get("load.f.profile"));
  m.body.lambda = number("energy.lambda_f");
  m.body.q = number("energy.q");
  m.surface.amplitude = parse_load_table("load.g.table", get("load.g.table"));
  m.surface.profile = profile_of(get("load.g.profile"));
  m.surface.r = number("energy.r");
  m.boundary.amplitude = parse_load_table("load.psi.table", get("load.psi.table"));
  m.boundary.profile = profile_of(get("load.psi.profile"));
  m.allow_nonconforming = boolean("energy.allow_nonconforming");
  try {
    m.validate(mesh);
  } catch (const ValidationError& e) {
    throw ConfigError("energy", e.what());
  }
  return m;
}

TimeGrid RunConfig::build_grid() const {
  const std::string& ex = get("time.explicit");
  if (!ex.empty()) return TimeGrid::from_knots(numbers("time.explicit", ex));
  return TimeGrid::uniform(number("time.T"), integer("time.knots"));
}

void RunConfig::set_step(double dt) {
  if (!(dt > 0.0)) throw ConfigError("time.knots", "--dt must be positive");
  const double T = number("time.T");
  const double n = std::round(T / dt);
  if (n < 1.0 || std::abs(n * dt - T) > 1e-9 * T)
    throw ConfigError("time.knots", "step " + format_double(dt) + " does not divide T = " + format_double(T));
  set("time.knots", std::to_string(static_cast<long>(n)));
  set("time.explicit", "");
}

SearchStrategy RunConfig::strategy() const {
  SearchStrategy s;
  s.kind = strategy_from_string(get("strategy.kind"));
  s.max_edges = integer("strategy.max_edges");
  s.greedy_sweeps = integer("strategy.greedy_sweeps");
  return s;
}

EvolutionOptions RunConfig::evolution_options() const {
  EvolutionOptions o;
  o.solve.tol = number("tol.solver");
  o.override_initial_minimality = boolean("initial.override");
  return o;
}

AuditTolerances RunConfig::tolerances() const {
  AuditTolerances t;
  t.energy = number("tol.energy");
  t.residual = number("tol.residual");
  t.balance = number("tol.balance");
  t.fenchel = number("tol.fenchel");
  t.jump = number("tol.jump");
  t.max_oracle_edges = integer("strategy.max_edges");
  return t;
}

CrackSet RunConfig::initial_crack(const Mesh& mesh) const {
  std::vector<EdgeId> ids;
  std::istringstream is(get("initial.crack"));
  long x;
  while (is >> x) ids.push_back(static_cast<EdgeId>(x));
  for (EdgeId e : ids) {
    if (e >= static_cast<EdgeId>(mesh.edge_count()) || !mesh.is_crackable(e))
      throw ConfigError("initial.crack", "edge " + std::to_string(e) + " is not a crackable edge");
  }
  return CrackSet(mesh, ids);
}

}  // namespace qsfrac
