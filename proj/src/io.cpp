#include "wavepin/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include <Eigen/Core>
#include <boost/version.hpp>

#include "wavepin/errors.hpp"

namespace wavepin {

std::size_t CsvTable::index(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw FormatError("column '" + name + "' missing");
  return static_cast<std::size_t>(it - header.begin());
}

std::vector<double> CsvTable::column(const std::string& name) const {
  const std::size_t k = index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[k]);
  return out;
}

const std::string& CsvTable::get_meta(const std::string& key) const {
  for (const auto& [k, v] : meta) {
    if (k == key) return v;
  }
  throw FormatError("metadata '" + key + "' missing");
}

namespace {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_number(const std::string& s, const fs::path& path, std::size_t line) {
  const char* b = s.c_str();
  char* e = nullptr;
  const double x = std::strtod(b, &e);
  while (e && *e == ' ') ++e;
  if (e == b || (e && *e != '\0')) {
    throw FormatError(path.string() + ":" + std::to_string(line) + ": not a number '" + s + "'");
  }
  return x;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

std::ofstream open_out(const fs::path& path, bool binary = false) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, binary ? std::ios::binary : std::ios::out);
  if (!f) throw FormatError("cannot write " + path.string());
  return f;
}

}  // namespace

void write_csv(const fs::path& path, const CsvTable& t) {
  std::ofstream f = open_out(path);
  for (const auto& [k, v] : t.meta) f << "# " << k << "=" << v << "\n";
  for (std::size_t i = 0; i < t.header.size(); ++i) f << (i ? "," : "") << t.header[i];
  f << "\n";
  for (const auto& r : t.rows) {
    if (r.size() != t.header.size()) throw FormatError("row width differs from header");
    for (std::size_t i = 0; i < r.size(); ++i) f << (i ? "," : "") << format_number(r[i]);
    f << "\n";
  }
  if (!f) throw FormatError("write failed: " + path.string());
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw FormatError("cannot read " + path.string());
  CsvTable t;
  std::string line;
  std::size_t n = 0;
  bool have_header = false;
  while (std::getline(f, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!have_header && line[0] == '#') {
      std::string body = line.substr(1);
      body.erase(0, body.find_first_not_of(' '));
      const auto eq = body.find('=');
      if (eq == std::string::npos) continue;
      t.meta.emplace_back(body.substr(0, eq), body.substr(eq + 1));
      continue;
    }
    if (!have_header) {
      t.header = split(line);
      have_header = true;
      continue;
    }
    const auto fields = split(line);
    if (fields.size() != t.header.size()) {
      throw FormatError(path.string() + ":" + std::to_string(n) + ": expected " +
                        std::to_string(t.header.size()) + " fields, got " +
                        std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& s : fields) row.push_back(parse_number(s, path, n));
    t.rows.push_back(std::move(row));
  }
  if (!have_header) throw FormatError(path.string() + ": no header row");
  return t;
}

CsvTable curve_table(const InterfaceCurve& c) {
  CsvTable t;
  t.meta.emplace_back("topology", c.closed() ? "closed" : "attached");
  t.meta.emplace_back("s_start", format_number(c.s_start));
  t.meta.emplace_back("s_end", format_number(c.s_end));
  t.header = {"x", "y"};
  for (const Vec2& p : c.points) t.rows.push_back({p.x, p.y});
  return t;
}

InterfaceCurve curve_from_table(const CsvTable& t) {
  InterfaceCurve c;
  const std::string& topo = t.get_meta("topology");
  if (topo == "closed") {
    c.topology = Topology::Closed;
  } else if (topo == "attached") {
    c.topology = Topology::Attached;
  } else {
    throw FormatError("unknown topology '" + topo + "'");
  }
  c.s_start = parse_number(t.get_meta("s_start"), "curve", 0);
  c.s_end = parse_number(t.get_meta("s_end"), "curve", 0);
  const std::size_t ix = t.index("x"), iy = t.index("y");
  for (const auto& r : t.rows) c.points.push_back({r[ix], r[iy]});
  return c;
}

void write_curve_csv(const fs::path& path, const InterfaceCurve& c) { write_csv(path, curve_table(c)); }

InterfaceCurve read_curve_csv(const fs::path& path) { return curve_from_table(read_csv(path)); }

CsvTable diagnostics_table(const std::vector<Diagnostics>& series) {
  CsvTable t;
  t.header = {"t", "mass", "v_mean", "level", "area_plus", "length",
              "cx", "cy", "s_estimate", "curves", "v_in_range"};
  for (const auto& d : series) {
    t.rows.push_back({d.t, d.M, d.v_mean, d.level, d.area_plus, d.length, d.cx, d.cy, d.s_estimate,
                      static_cast<double>(d.curves), d.v_in_range ? 1.0 : 0.0});
  }
  return t;
}

CsvTable fbp_table(const std::vector<FbpRow>& rows) {
  CsvTable t;
  t.header = {"t", "v0", "area_plus", "length", "s_estimate", "isoperimetric_ratio"};
  for (const auto& r : rows) t.rows.push_back({r.t, r.v0, r.area_plus, r.length, r.s_estimate, r.iso_ratio});
  return t;
}

CsvTable reduced_table(const std::vector<ReducedState>& samples) {
  CsvTable t;
  t.header = {"t", "s", "R0"};
  const std::size_t N = samples.empty() ? 1 : samples.front().N();
  for (std::size_t n = 2; n <= N; ++n) t.header.push_back("R" + std::to_string(n));
  for (const auto& s : samples) {
    std::vector<double> r{s.t, s.s, s.R0};
    r.insert(r.end(), s.R.begin(), s.R.end());
    t.rows.push_back(std::move(r));
  }
  return t;
}

namespace {

template <typename T>
void put_le(std::string& out, T value) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  U bits;
  std::memcpy(&bits, &value, sizeof bits);
  for (std::size_t i = 0; i < sizeof bits; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

template <typename T>
T get_le(const std::string& in, std::size_t& pos) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  if (pos + sizeof(U) > in.size()) throw FormatError("snapshot truncated");
  U bits = 0;
  for (std::size_t i = 0; i < sizeof bits; ++i) {
    bits |= static_cast<U>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  }
  pos += sizeof bits;
  T value;
  std::memcpy(&value, &bits, sizeof value);
  return value;
}

}  // namespace

Snapshot snapshot_of(const SimState& s) {
  const GridSpec& g = *s.grid;
  Snapshot snap;
  snap.nx = static_cast<std::uint32_t>(g.nx);
  snap.ny = static_cast<std::uint32_t>(g.ny);
  snap.h = g.h;
  snap.t = s.t;
  snap.u.assign(g.size(), NAN);
  snap.v.assign(g.size(), NAN);
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g.mask[k]) {
      snap.u[k] = s.u[k];
      snap.v[k] = s.v[k];
    }
  }
  return snap;
}

void write_snapshot(const fs::path& path, const Snapshot& snap) {
  const std::size_t n = static_cast<std::size_t>(snap.nx) * snap.ny;
  if (snap.u.size() != n || snap.v.size() != n) throw FormatError("snapshot field size mismatch");
  std::string buf = "WPF1";
  buf.reserve(4 + 8 + 16 + 16 * n);
  put_le(buf, snap.nx);
  put_le(buf, snap.ny);
  put_le(buf, snap.h);
  put_le(buf, snap.t);
  for (double x : snap.u) put_le(buf, x);
  for (double x : snap.v) put_le(buf, x);
  std::ofstream f = open_out(path, true);
  f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!f) throw FormatError("write failed: " + path.string());
}

void write_snapshot(const fs::path& path, const SimState& s) { write_snapshot(path, snapshot_of(s)); }

Snapshot read_snapshot(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot read " + path.string());
  const std::string in((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (in.size() < 4 || in.compare(0, 4, "WPF1") != 0) throw FormatError(path.string() + ": bad magic");
  std::size_t pos = 4;
  Snapshot snap;
  snap.nx = get_le<std::uint32_t>(in, pos);
  snap.ny = get_le<std::uint32_t>(in, pos);
  snap.h = get_le<double>(in, pos);
  snap.t = get_le<double>(in, pos);
  const std::size_t n = static_cast<std::size_t>(snap.nx) * snap.ny;
  if (in.size() - pos != 16 * n) {
    throw FormatError(path.string() + ": expected " + std::to_string(16 * n) + " field bytes, found " +
                      std::to_string(in.size() - pos));
  }
  snap.u.resize(n);
  snap.v.resize(n);
  for (double& x : snap.u) x = get_le<double>(in, pos);
  for (double& x : snap.v) x = get_le<double>(in, pos);
  return snap;
}

nlohmann::json equilibria_json(const std::vector<Equilibrium>& eq) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& e : eq) {
    out.push_back({{"s", e.s},
                   {"R0", e.R0},
                   {"R", e.R},
                   {"K", e.K},
                   {"K_ss", e.K_ss},
                   {"stability", to_string(e.stability)},
                   {"eigenvalues", e.eigenvalues}});
  }
  return out;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream f = open_out(path);
  f << j.dump(2) << "\n";
  if (!f) throw FormatError("write failed: " + path.string());
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw FormatError("cannot read " + path.string());
  try {
    return nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

nlohmann::json version_info() {
  return {{"wavepin", "0.1.0"},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                        "." + std::to_string(EIGEN_MINOR_VERSION)},
          {"boost", BOOST_LIB_VERSION},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
          {"compiler", __VERSION__},
          {"cplusplus", __cplusplus}};
}

void write_manifest(const fs::path& path, const Manifest& m) {
  nlohmann::json j;
  j["scenario"] = m.scenario;
  j["config"] = m.config;
  j["summary"] = m.summary;
  j["files"] = m.files;
  j["versions"] = version_info();
  j["wall_time_s"] = m.wall_time_s;
  write_json(path, j);
}

Manifest read_manifest(const fs::path& path) {
  const nlohmann::json j = read_json(path);
  Manifest m;
  try {
    m.scenario = j.at("scenario").get<std::string>();
    m.config = j.at("config");
    m.summary = j.value("summary", nlohmann::json::object());
    m.files = j.at("files").get<std::vector<std::string>>();
    m.wall_time_s = j.at("wall_time_s").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  for (const auto& f : m.files) {
    if (!fs::exists(path.parent_path() / f)) throw FormatError("manifest lists missing file " + f);
  }
  return m;
}

}  // namespace wavepin
