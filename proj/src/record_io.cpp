#include "qsfrac/record_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "qsfrac/error.hpp"
#include "qsfrac/hash.hpp"

namespace qsfrac {

namespace {

void put(std::ostream& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, " %.17g", v);
  out << buf;
}

std::string or_dash(const std::string& s) { return s.empty() ? "-" : s; }

void write_body(std::ostream& out, const EvolutionRecord& rec) {
  out << "body_begin " << rec.knots.size() << '\n';
  for (std::size_t i = 0; i < rec.knots.size(); ++i) {
    const KnotState& k = rec.knots[i];
    out << "knot " << i << " t";
    put(out, k.t);
    out << "\ncrack " << k.crack.size();
    for (EdgeId e : k.crack) out << ' ' << e;
    out << "\ndofs " << k.field.values().size();
    for (double v : k.field.values()) put(out, v);
    out << "\nenergy";
    put(out, k.energy.bulk);
    put(out, k.energy.surface);
    put(out, k.energy.body);
    put(out, k.energy.surface_force);
    put(out, k.energy.total());
    if (k.has_power) {
      for (const auto& [tag, ps] : {std::pair{"power", &k.power}, std::pair{"power_right", &k.power_right}}) {
        out << '\n' << tag;
        put(out, ps->bulk);
        put(out, ps->body_dual);
        put(out, ps->body_rate);
        put(out, ps->surface_dual);
        put(out, ps->surface_rate);
      }
    } else {
      out << "\npower none\npower_right none";
    }
    out << "\nsolve " << k.solve.iterations;
    put(out, k.solve.residual);
    put(out, k.solve.energy);
    out << "\n";
  }
  out << "body_end\n";
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}
  std::istringstream next(const std::string& tag) {
    std::string line;
    if (!std::getline(in_, line)) throw ValidationError("record truncated: expected '" + tag + "'");
    ++lineno_;
    std::istringstream is(line);
    std::string head;
    is >> head;
    if (head != tag)
      throw ValidationError("record line " + std::to_string(lineno_) + ": expected '" + tag + "', got '" + head + "'");
    is >> std::ws;
    return is;
  }
  std::string raw() {
    std::string line;
    if (!std::getline(in_, line)) throw ValidationError("record truncated inside config block");
    ++lineno_;
    return line;
  }
  int line() const { return lineno_; }

 private:
  std::istream& in_;
  int lineno_ = 0;
};

double read_double(std::istringstream& is, const LineReader& lr) {
  std::string tok;
  if (!(is >> tok)) throw ValidationError("record line " + std::to_string(lr.line()) + ": missing number");
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size())
    throw ValidationError("record line " + std::to_string(lr.line()) + ": bad number '" + tok + "'");
  return v;
}

long read_long(std::istringstream& is, const LineReader& lr) {
  long v;
  if (!(is >> v)) throw ValidationError("record line " + std::to_string(lr.line()) + ": missing integer");
  return v;
}

std::string rest(std::istringstream& is) {
  std::string s;
  std::getline(is, s);
  return s == "-" ? "" : s;
}

std::uint64_t parse_hex(const std::string& s) { return std::strtoull(s.c_str(), nullptr, 16); }

}  // namespace

std::string record_body(const EvolutionRecord& record) {
  std::ostringstream os;
  write_body(os, record);
  return os.str();
}

void write_record(std::ostream& out, const EvolutionRecord& rec) {
  out << "qsfrac-record " << kRecordFormatVersion << '\n';
  out << "config_hash " << hex_digest(rec.config_hash) << '\n';
  out << "mesh_hash " << hex_digest(rec.mesh_hash) << '\n';
  out << "strategy " << to_string(rec.strategy) << '\n';
  out << "certification " << to_string(rec.certification) << '\n';
  out << "complete " << (rec.complete ? 1 : 0) << '\n';
  out << "conforming " << (rec.conforming ? 1 : 0) << '\n';
  out << "annotation " << or_dash(rec.annotation) << '\n';
  out << "failure " << or_dash(rec.failure) << '\n';
  out << "grid " << rec.grid.knots.size();
  for (double t : rec.grid.knots) put(out, t);
  out << '\n';
  std::size_t lines = 0;
  for (char c : rec.config_text) lines += c == '\n';
  if (!rec.config_text.empty() && rec.config_text.back() != '\n') ++lines;
  out << "config_begin " << lines << '\n' << rec.config_text;
  if (!rec.config_text.empty() && rec.config_text.back() != '\n') out << '\n';
  out << "config_end\n";
  write_body(out, rec);
}

LoadedRecord read_record(std::istream& in) {
  LineReader lr(in);
  LoadedRecord out;
  EvolutionRecord& rec = out.record;
  {
    auto is = lr.next("qsfrac-record");
    const long v = read_long(is, lr);
    if (v != kRecordFormatVersion) throw ValidationError("unsupported record format version " + std::to_string(v));
  }
  { auto is = lr.next("config_hash"); std::string h; is >> h; rec.config_hash = parse_hex(h); }
  { auto is = lr.next("mesh_hash"); std::string h; is >> h; rec.mesh_hash = parse_hex(h); }
  { auto is = lr.next("strategy"); std::string s; is >> s; rec.strategy = strategy_from_string(s); }
  { auto is = lr.next("certification"); std::string s; is >> s; rec.certification = certification_from_string(s); }
  { auto is = lr.next("complete"); rec.complete = read_long(is, lr) != 0; }
  { auto is = lr.next("conforming"); rec.conforming = read_long(is, lr) != 0; }
  { auto is = lr.next("annotation"); rec.annotation = rest(is); }
  { auto is = lr.next("failure"); rec.failure = rest(is); }
  {
    auto is = lr.next("grid");
    const long n = read_long(is, lr);
    rec.grid.knots.resize(static_cast<std::size_t>(n));
    for (auto& t : rec.grid.knots) t = read_double(is, lr);
    rec.grid.validate();
  }
  {
    auto is = lr.next("config_begin");
    const long n = read_long(is, lr);
    for (long i = 0; i < n; ++i) rec.config_text += lr.raw() + "\n";
    lr.next("config_end");
  }
  out.config = RunConfig::parse(rec.config_text);
  if (out.config.hash() != rec.config_hash) throw ValidationError("record config hash does not match its embedded config");
  out.mesh = std::make_shared<const Mesh>(out.config.build_mesh());
  if (out.mesh->hash() != rec.mesh_hash) throw ValidationError("record mesh hash does not match the rebuilt mesh");
  out.model = out.config.build_model(*out.mesh);

  auto is = lr.next("body_begin");
  const long n = read_long(is, lr);
  std::map<std::vector<EdgeId>, TopologyPtr> topologies;
  for (long i = 0; i < n; ++i) {
    KnotState k;
    {
      auto ks = lr.next("knot");
      if (read_long(ks, lr) != i) throw ValidationError("record knots out of order");
      std::string tag;
      ks >> tag;
      k.t = read_double(ks, lr);
    }
    {
      auto cs = lr.next("crack");
      const long m = read_long(cs, lr);
      std::vector<EdgeId> edges(static_cast<std::size_t>(m));
      for (auto& e : edges) e = static_cast<EdgeId>(read_long(cs, lr));
      k.crack = CrackSet(*out.mesh, edges);
    }
    {
      auto ds = lr.next("dofs");
      const long m = read_long(ds, lr);
      std::vector<double> v(static_cast<std::size_t>(m));
      for (auto& x : v) x = read_double(ds, lr);
      auto& topo = topologies[k.crack.edges()];
      if (!topo) topo = DofTopology::build(*out.mesh, k.crack);
      k.field = BrokenField(topo, std::move(v));
    }
    {
      auto es = lr.next("energy");
      k.energy.bulk = read_double(es, lr);
      k.energy.surface = read_double(es, lr);
      k.energy.body = read_double(es, lr);
      k.energy.surface_force = read_double(es, lr);
    }
    for (const auto& [tag, dst] : {std::pair{"power", &k.power}, std::pair{"power_right", &k.power_right}}) {
      auto ps = lr.next(tag);
      if (ps.str().find("none") != std::string::npos) {
        k.has_power = false;
        continue;
      }
      dst->bulk = read_double(ps, lr);
      dst->body_dual = read_double(ps, lr);
      dst->body_rate = read_double(ps, lr);
      dst->surface_dual = read_double(ps, lr);
      dst->surface_rate = read_double(ps, lr);
    }
    {
      auto ss = lr.next("solve");
      k.solve.iterations = static_cast<int>(read_long(ss, lr));
      k.solve.residual = read_double(ss, lr);
      k.solve.energy = read_double(ss, lr);
    }
    rec.knots.push_back(std::move(k));
  }
  lr.next("body_end");
  return out;
}

LoadedRecord read_record_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read record file '" + path + "'");
  return read_record(in);
}

void write_record_file(const std::string& path, const EvolutionRecord& record) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write record file '" + path + "'");
  write_record(out, record);
  if (!out) throw ValidationError("failed writing record file '" + path + "'");
}

void stamp_record(EvolutionRecord& record, const RunConfig& config) {
  record.config_text = config.effective_text();
  record.config_hash = config.hash();
}

void write_csv(std::ostream& out, const EvolutionRecord& record) {
  out << "t,W,Es,F,G,E_total,crack_length,dof_count\n";
  char buf[64];
  for (const KnotState& k : record.knots) {
    const double vals[7] = {k.t, k.energy.bulk, k.energy.surface, k.energy.body, k.energy.surface_force,
                            k.energy.total(), k.crack.length(k.field.mesh())};
    for (double v : vals) {
      std::snprintf(buf, sizeof buf, "%.16e,", v);
      out << buf;
    }
    out << k.field.values().size() << '\n';
  }
}

}  // namespace qsfrac
