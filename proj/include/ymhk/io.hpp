#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ymhk/algebra.hpp"
#include "ymhk/errors.hpp"
#include "ymhk/flow.hpp"

namespace ymhk {

// ---------------------------------------------------------------------------
// Run configuration (key = value text, '#' comments)

struct InitSpec {
  enum class Kind { Cold, Hot, Wave, File } kind = Kind::Cold;
  double amplitude = 0.0;  // Hot / Wave
  std::string path;        // File
  std::string text = "cold";
};

struct RunConfig {
  std::string group;  // "u1" | "su2"
  int n = 0;
  std::vector<int> extents;
  double h = 0.0;
  int k = 0;
  double lambda = 0.0;
  InitSpec init;
  std::uint64_t seed = 0;
  StepMode integrator = StepMode::Backtracking;
  double dt_safety = 0.1;
  double t_max = 0.0;
  std::int64_t max_steps = 0;
  std::int64_t record_every = 1;
  std::int64_t snapshot_every = 0;
  bool record_derivatives = false;
  double blowup_ceiling = 1e6;
  std::int64_t reunit_every = 100;
  std::string out_dir = ".";

  FlowParams flow_params() const { return FlowParams{k, lambda}; }

  FlowSchedule schedule() const {
    FlowSchedule s;
    s.mode = integrator;
    s.dt_safety = dt_safety;
    s.t_max = t_max;
    s.max_steps = max_steps;
    s.record_every = record_every;
    s.snapshot_every = snapshot_every;
    s.record_derivatives = record_derivatives;
    s.blowup_ceiling = blowup_ceiling;
    s.reunit_every = reunit_every;
    return s;
  }

  /// One-line summary echoed into trace headers and reports.
  std::string summary() const {
    std::string e;
    for (std::size_t i = 0; i < extents.size(); ++i) {
      if (i) e += ",";
      e += std::to_string(extents[i]);
    }
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "group=%s n=%d extents=%s h=%.17g k=%d lambda=%.17g "
                  "init=%s seed=%llu integrator=%s dt_safety=%.17g",
                  group.c_str(), n, e.c_str(), h, k, lambda,
                  init.text.c_str(), static_cast<unsigned long long>(seed),
                  integrator == StepMode::Euler ? "euler" : "backtracking",
                  dt_safety);
    return buf;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(key, "not a number: '" + v + "'");
  }
}

inline std::int64_t parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long i = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ConfigError(key, "not an integer: '" + v + "'");
  }
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const unsigned long long i = std::stoull(v, &pos);
    if (pos != v.size() || v.find('-') != std::string::npos)
      throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ConfigError(key, "not an unsigned integer: '" + v + "'");
  }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key, "not a boolean: '" + v + "'");
}

}  // namespace detail

inline InitSpec parse_init(const std::string& v) {
  InitSpec s;
  s.text = v;
  if (v == "cold") {
    s.kind = InitSpec::Kind::Cold;
  } else if (v.rfind("hot:", 0) == 0) {
    s.kind = InitSpec::Kind::Hot;
    s.amplitude = detail::parse_double("init", v.substr(4));
    if (!(s.amplitude >= 0.0))
      throw ConfigError("init", "hot amplitude must be >= 0");
  } else if (v.rfind("wave:", 0) == 0) {
    s.kind = InitSpec::Kind::Wave;
    s.amplitude = detail::parse_double("init", v.substr(5));
    if (!(s.amplitude >= 0.0))
      throw ConfigError("init", "wave amplitude must be >= 0");
  } else if (v.rfind("file:", 0) == 0) {
    s.kind = InitSpec::Kind::File;
    s.path = v.substr(5);
    if (s.path.empty()) throw ConfigError("init", "file path is empty");
  } else {
    throw ConfigError(
        "init",
        "expected cold | hot:<amplitude> | wave:<amplitude> | file:<path>, "
        "got '" + v + "'");
  }
  return s;
}

/// Parse key = value lines ('#' starts a comment, blank lines ignored).
/// Unknown and duplicate keys are rejected with the offending key named.
inline RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  std::vector<std::string> seen;
  bool has_group = false, has_n = false, has_extents = false, has_h = false,
       has_k = false, has_tmax = false;

  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string line = text.substr(
        pos, nl == std::string::npos ? std::string::npos : nl - pos);
    pos = nl == std::string::npos ? text.size() + 1 : nl + 1;

    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(line, "expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(line, "empty key");

    for (const auto& s : seen)
      if (s == key) throw ConfigError(key, "duplicate key");
    seen.push_back(key);

    if (key == "group") {
      if (val != "u1" && val != "su2")
        throw ConfigError(key, "expected u1 or su2, got '" + val + "'");
      cfg.group = val;
      has_group = true;
    } else if (key == "n") {
      cfg.n = static_cast<int>(detail::parse_int(key, val));
      has_n = true;
    } else if (key == "extents") {
      cfg.extents.clear();
      std::size_t p = 0;
      while (p <= val.size()) {
        auto c = val.find(',', p);
        if (c == std::string::npos) c = val.size();
        const std::string tok = detail::trim(val.substr(p, c - p));
        if (tok.empty()) throw ConfigError(key, "empty extent entry");
        cfg.extents.push_back(static_cast<int>(detail::parse_int(key, tok)));
        p = c + 1;
      }
      has_extents = true;
    } else if (key == "h") {
      cfg.h = detail::parse_double(key, val);
      has_h = true;
    } else if (key == "k") {
      cfg.k = static_cast<int>(detail::parse_int(key, val));
      has_k = true;
    } else if (key == "lambda") {
      cfg.lambda = detail::parse_double(key, val);
    } else if (key == "init") {
      cfg.init = parse_init(val);
    } else if (key == "seed") {
      cfg.seed = detail::parse_uint(key, val);
    } else if (key == "integrator") {
      if (val == "euler")
        cfg.integrator = StepMode::Euler;
      else if (val == "backtracking")
        cfg.integrator = StepMode::Backtracking;
      else
        throw ConfigError(key,
                          "expected euler or backtracking, got '" + val + "'");
    } else if (key == "dt_safety") {
      cfg.dt_safety = detail::parse_double(key, val);
    } else if (key == "t_max") {
      cfg.t_max = detail::parse_double(key, val);
      has_tmax = true;
    } else if (key == "max_steps") {
      cfg.max_steps = detail::parse_int(key, val);
    } else if (key == "record_every") {
      cfg.record_every = detail::parse_int(key, val);
    } else if (key == "snapshot_every") {
      cfg.snapshot_every = detail::parse_int(key, val);
    } else if (key == "record_derivatives") {
      cfg.record_derivatives = detail::parse_bool(key, val);
    } else if (key == "blowup_ceiling") {
      cfg.blowup_ceiling = detail::parse_double(key, val);
    } else if (key == "reunit_every") {
      cfg.reunit_every = detail::parse_int(key, val);
    } else if (key == "out_dir") {
      cfg.out_dir = val;
    } else {
      throw ConfigError(key, "unknown key");
    }
  }

  if (!has_group) throw ConfigError("group", "required key missing");
  if (!has_n) throw ConfigError("n", "required key missing");
  if (!has_extents) throw ConfigError("extents", "required key missing");
  if (!has_h) throw ConfigError("h", "required key missing");
  if (!has_k) throw ConfigError("k", "required key missing");
  if (!has_tmax) throw ConfigError("t_max", "required key missing");

  if (cfg.n < 1 || cfg.n > kMaxDim)
    throw ConfigError("n", "dimension must be 1..4");
  if (static_cast<int>(cfg.extents.size()) != cfg.n)
    throw ConfigError("extents", "entry count does not match n");
  for (int e : cfg.extents)
    if (e < kMinExtent)
      throw ConfigError("extents", "extents must be >= 4");
  if (!(cfg.h > 0.0)) throw ConfigError("h", "spacing must be positive");
  if (cfg.k < 0 || cfg.k > 3) throw ConfigError("k", "order must be 0..3");
  if (cfg.lambda < 0.0) throw ConfigError("lambda", "must be >= 0");
  if (!(cfg.dt_safety > 0.0 && cfg.dt_safety <= 1.0))
    throw ConfigError("dt_safety", "must be in (0, 1]");
  if (cfg.t_max < 0.0) throw ConfigError("t_max", "must be >= 0");
  if (cfg.record_every < 1) throw ConfigError("record_every", "must be >= 1");
  if (cfg.snapshot_every < 0)
    throw ConfigError("snapshot_every", "must be >= 0");
  if (cfg.max_steps < 0) throw ConfigError("max_steps", "must be >= 0");
  if (cfg.reunit_every < 0) throw ConfigError("reunit_every", "must be >= 0");
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open config file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_config_text(text);
}

// ---------------------------------------------------------------------------
// Snapshot binary format (fixed little-endian layout)

inline constexpr std::uint32_t kSnapshotVersion = 1;

namespace detail {

struct ByteWriter {
  std::vector<unsigned char> buf;

  void u8(std::uint8_t v) { buf.push_back(v); }
  void u16(std::uint16_t v) {
    for (int i = 0; i < 2; ++i) buf.push_back((v >> (8 * i)) & 0xff);
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back((v >> (8 * i)) & 0xff);
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back((v >> (8 * i)) & 0xff);
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void bytes(const char* p, std::size_t nb) {
    buf.insert(buf.end(), p, p + nb);
  }
};

struct ByteReader {
  const unsigned char* p = nullptr;
  std::size_t size = 0;
  std::size_t off = 0;

  void need(std::size_t nb, const char* what) const {
    if (off + nb > size)
      throw FormatError(off, std::string("truncated while reading ") + what);
  }
  std::uint8_t u8(const char* what) {
    need(1, what);
    return p[off++];
  }
  std::uint16_t u16(const char* what) {
    need(2, what);
    std::uint16_t v = 0;
    for (int i = 0; i < 2; ++i) v |= std::uint16_t(p[off + i]) << (8 * i);
    off += 2;
    return v;
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(p[off + i]) << (8 * i);
    off += 4;
    return v;
  }
  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(p[off + i]) << (8 * i);
    off += 8;
    return v;
  }
  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
};

inline std::vector<unsigned char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path);
  return std::vector<unsigned char>((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
}

/// Write-all then atomically rename into place.
inline void write_file_atomic(const std::string& path,
                              const std::vector<unsigned char>& data) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open for writing: " + tmp);
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
    if (!out) throw Error("short write: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("cannot rename " + tmp + " -> " + path);
}

}  // namespace detail

template <class G>
void save_snapshot(const FlowState<G>& st, const std::string& path) {
  detail::ByteWriter w;
  const Lattice& lat = st.U.lat;
  const int n = lat.dim();
  w.bytes("YMHK", 4);
  w.u32(kSnapshotVersion);
  w.u8(static_cast<std::uint8_t>(G::snapshot_tag));
  w.u8(static_cast<std::uint8_t>(n));
  w.u16(0);  // reserved
  for (int a = 0; a < n; ++a)
    w.u32(static_cast<std::uint32_t>(lat.extent(a)));
  w.f64(lat.spacing());
  w.u32(static_cast<std::uint32_t>(st.params.k));
  w.f64(st.params.lambda);
  w.f64(st.t);
  double tmp[2 * G::rep_dim * G::rep_dim];
  for (std::int64_t s = 0; s < lat.sites(); ++s)
    for (int mu = 0; mu < n; ++mu) {
      G::write_element(st.U.link(static_cast<SiteId>(s), mu), tmp);
      for (int i = 0; i < G::element_doubles; ++i) w.f64(tmp[i]);
    }
  for (std::int64_t s = 0; s < lat.sites(); ++s) {
    const auto v = st.u.value(static_cast<SiteId>(s));
    for (int i = 0; i < G::rep_dim; ++i) {
      w.f64(v[i].real());
      w.f64(v[i].imag());
    }
  }
  detail::write_file_atomic(path, w.buf);
}

struct SnapshotHeader {
  std::uint32_t version = 0;
  int group_tag = 0;  // 0 = U(1), 1 = SU(2)
  std::string group_name;
  int n = 0;
  std::vector<int> extents;
  double h = 0.0;
  int k = 0;
  double lambda = 0.0;
  double t = 0.0;
};

namespace detail {

inline SnapshotHeader read_header(ByteReader& r) {
  SnapshotHeader hd;
  {
    r.need(4, "magic");
    if (std::memcmp(r.p, "YMHK", 4) != 0)
      throw FormatError(0, "bad magic (expected YMHK)");
    r.off += 4;
  }
  hd.version = r.u32("version");
  if (hd.version != kSnapshotVersion)
    throw FormatError(4, "unsupported version " + std::to_string(hd.version));
  hd.group_tag = r.u8("group");
  if (hd.group_tag != 0 && hd.group_tag != 1)
    throw FormatError(8, "unknown group tag " + std::to_string(hd.group_tag));
  hd.group_name = hd.group_tag == 0 ? "U(1)" : "SU(2)";
  hd.n = r.u8("dimension");
  if (hd.n < 1 || hd.n > kMaxDim)
    throw FormatError(9, "dimension must be 1..4, got " +
                             std::to_string(hd.n));
  const std::size_t res_off = r.off;
  if (r.u16("reserved") != 0)
    throw FormatError(res_off, "reserved field must be zero");
  for (int a = 0; a < hd.n; ++a) {
    const std::size_t off = r.off;
    const std::uint32_t e = r.u32("extent");
    if (e < static_cast<std::uint32_t>(kMinExtent) || e > (1u << 20))
      throw FormatError(off, "extent out of range: " + std::to_string(e));
    hd.extents.push_back(static_cast<int>(e));
  }
  {
    const std::size_t off = r.off;
    hd.h = r.f64("spacing");
    if (!(hd.h > 0.0)) throw FormatError(off, "spacing must be positive");
  }
  {
    const std::size_t off = r.off;
    hd.k = static_cast<int>(r.u32("order k"));
    if (hd.k < 0 || hd.k > 3)
      throw FormatError(off, "order k must be 0..3");
  }
  {
    const std::size_t off = r.off;
    hd.lambda = r.f64("lambda");
    if (!(hd.lambda >= 0.0))
      throw FormatError(off, "lambda must be >= 0");
  }
  hd.t = r.f64("time");
  return hd;
}

}  // namespace detail

inline SnapshotHeader read_snapshot_header(const std::string& path) {
  const auto data = detail::read_file(path);
  detail::ByteReader r{data.data(), data.size(), 0};
  return detail::read_header(r);
}

/// Unitarity tolerance on load; worse than this is corruption, not rounding.
inline constexpr double kLoadUnitarityTol = 1e-9;

template <class G>
FlowState<G> load_snapshot_body(detail::ByteReader& r,
                                const SnapshotHeader& hd) {
  const Lattice lat(hd.extents, hd.h);
  GaugeField<G> U(lat);
  HiggsField<G> u(lat);
  const int n = lat.dim();
  double tmp[2 * G::rep_dim * G::rep_dim];
  for (std::int64_t s = 0; s < lat.sites(); ++s)
    for (int mu = 0; mu < n; ++mu) {
      for (int i = 0; i < G::element_doubles; ++i) tmp[i] = r.f64("link");
      U.link(static_cast<SiteId>(s), mu) = G::read_element(tmp);
    }
  for (std::int64_t s = 0; s < lat.sites(); ++s) {
    typename G::HiggsVec v;
    for (int i = 0; i < G::rep_dim; ++i) {
      const double re = r.f64("higgs");
      const double im = r.f64("higgs");
      v[i] = cplx(re, im);
    }
    u.set_value(static_cast<SiteId>(s), v);
  }
  if (r.off != r.size)
    throw FormatError(r.off, "trailing bytes after snapshot payload");
  const double defect = U.unitarity_defect();
  if (!(defect <= kLoadUnitarityTol)) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "link unitarity defect %.3g exceeds %.3g",
                  defect, kLoadUnitarityTol);
    throw CorruptSnapshot(buf);
  }
  FlowState<G> st(std::move(U), std::move(u), FlowParams{hd.k, hd.lambda});
  st.t = hd.t;
  return st;
}

using AnyState = std::variant<FlowState<U1>, FlowState<SU2>>;

inline AnyState load_snapshot(const std::string& path) {
  const auto data = detail::read_file(path);
  detail::ByteReader r{data.data(), data.size(), 0};
  const SnapshotHeader hd = detail::read_header(r);
  if (hd.group_tag == 0) return load_snapshot_body<U1>(r, hd);
  return load_snapshot_body<SU2>(r, hd);
}

// ---------------------------------------------------------------------------
// Trace CSV

inline std::string trace_header_line(int k, bool with_derivs) {
  std::string h =
      "step,t,dt,E_total,E_curv,E_higgs,E_pot,l2_u,sup_F,sup_u2,grad_norm";
  if (with_derivs)
    for (int q = 0; q <= k; ++q)
      h += ",d" + std::to_string(q) + "F_l2";
  return h;
}

inline std::string format_trace_row(const TraceRecord& r) {
  char buf[64];
  std::string line = std::to_string(r.step);
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, ",%.17g", v);
    line += buf;
  };
  put(r.t);
  put(r.dt);
  put(r.e_total);
  put(r.e_curv);
  put(r.e_higgs);
  put(r.e_pot);
  put(r.l2_u);
  put(r.sup_F);
  put(r.sup_u2);
  put(r.grad_norm);
  for (double v : r.dqF_l2) put(v);
  return line;
}

/// Append-only CSV writer; one flushed line per row so a killed run still
/// leaves a parseable prefix.
class TraceWriter {
 public:
  TraceWriter(const std::string& path, const std::string& meta_comment,
              int k, bool with_derivs)
      : out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw Error("cannot open trace file: " + path);
    if (!meta_comment.empty()) out_ << "# " << meta_comment << "\n";
    out_ << trace_header_line(k, with_derivs) << "\n";
    out_.flush();
  }

  void write(const TraceRecord& r) {
    out_ << format_trace_row(r) << "\n";
    out_.flush();
  }

 private:
  std::ofstream out_;
};

/// Parse a trace CSV back into records ('#' comment lines skipped).
/// Derivative columns, if present, populate dqF_l2 in order.
inline std::vector<TraceRecord> read_trace_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open trace file: " + path);
  std::vector<TraceRecord> out;
  std::string line;
  bool header_seen = false;
  std::size_t ncols = 0, nderiv = 0;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> toks;
    std::size_t p = 0;
    while (p <= line.size()) {
      auto c = line.find(',', p);
      if (c == std::string::npos) c = line.size();
      toks.push_back(line.substr(p, c - p));
      p = c + 1;
    }
    if (!header_seen) {
      if (toks.size() < 11 || toks[0] != "step")
        throw FormatError(lineno, "unrecognized trace header");
      ncols = toks.size();
      nderiv = ncols - 11;
      header_seen = true;
      continue;
    }
    if (toks.size() != ncols)
      throw FormatError(lineno, "row has " + std::to_string(toks.size()) +
                                    " columns, expected " +
                                    std::to_string(ncols));
    TraceRecord r;
    try {
      std::size_t i = 0;
      r.step = std::stoll(toks[i++]);
      r.t = std::stod(toks[i++]);
      r.dt = std::stod(toks[i++]);
      r.e_total = std::stod(toks[i++]);
      r.e_curv = std::stod(toks[i++]);
      r.e_higgs = std::stod(toks[i++]);
      r.e_pot = std::stod(toks[i++]);
      r.l2_u = std::stod(toks[i++]);
      r.sup_F = std::stod(toks[i++]);
      r.sup_u2 = std::stod(toks[i++]);
      r.grad_norm = std::stod(toks[i++]);
      for (std::size_t q = 0; q < nderiv; ++q)
        r.dqF_l2.push_back(std::stod(toks[i++]));
    } catch (const std::exception&) {
      throw FormatError(lineno, "unparseable numeric field");
    }
    out.push_back(std::move(r));
  }
  if (!header_seen) throw FormatError(0, "trace file has no header row");
  return out;
}

// ---------------------------------------------------------------------------
// Initial states

template <class G>
FlowState<G> make_initial_state(const RunConfig& cfg) {
  if (cfg.group != G::name)
    throw ArgumentError("make_initial_state: config group is " + cfg.group);
  const FlowParams p = cfg.flow_params();
  if (cfg.init.kind == InitSpec::Kind::File) {
    AnyState any = load_snapshot(cfg.init.path);
    if (!std::holds_alternative<FlowState<G>>(any))
      throw ConfigError("init", "snapshot group does not match config group");
    FlowState<G> st = std::get<FlowState<G>>(std::move(any));
    const Lattice want(cfg.extents, cfg.h);
    if (!st.U.lat.same_shape(want))
      throw ConfigError("init", "snapshot lattice does not match config");
    // A fresh run treats the file as initial data for the configured flow.
    st.params = p;
    st.params.validate();
    st.t = 0.0;
    st.step_count = 0;
    st.has_energy = false;
    return st;
  }
  const Lattice lat(cfg.extents, cfg.h);
  if (cfg.init.kind == InitSpec::Kind::Cold) {
    auto [U, u] = cold_start<G>(lat);
    return FlowState<G>(std::move(U), std::move(u), p);
  }
  if (cfg.init.kind == InitSpec::Kind::Wave) {
    auto [U, u] = wave_start<G>(lat, cfg.init.amplitude);
    return FlowState<G>(std::move(U), std::move(u), p);
  }
  auto [U, u] = hot_start<G>(lat, cfg.init.amplitude, cfg.seed);
  return FlowState<G>(std::move(U), std::move(u), p);
}

inline AnyState make_initial_state_any(const RunConfig& cfg) {
  if (cfg.group == "u1") return make_initial_state<U1>(cfg);
  return make_initial_state<SU2>(cfg);
}

}  // namespace ymhk
