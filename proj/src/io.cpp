#include "jetforge/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace jetforge {

namespace {

void require_stream(const std::ios& s, const std::string& what,
                    const std::string& path) {
  require(bool(s), what + ": I/O failure at '" + path + "'");
}

Real parse_number(const std::string& s) {
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    Real num = std::stod(s.substr(0, slash));
    Real den = std::stod(s.substr(slash + 1));
    require(den != 0.0, "config: rational literal with zero denominator");
    return num / den;
  }
  return std::stod(s);
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = (v >> (8 * i)) & 0xff;
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(b[i]) << (8 * i);
  return v;
}

void put_f64(std::ostream& os, Real v) {
  static_assert(sizeof(Real) == 8);
  std::uint64_t u;
  std::memcpy(&u, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = (u >> (8 * i)) & 0xff;
  os.write(reinterpret_cast<const char*>(b), 8);
}

Real get_f64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u |= std::uint64_t(b[i]) << (8 * i);
  Real v;
  std::memcpy(&v, &u, 8);
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// field export

ExportFormat export_format_from_string(const std::string& s) {
  if (s == "pf1") return ExportFormat::pf1;
  if (s == "vtk_legacy" || s == "vtk") return ExportFormat::vtk_legacy;
  if (s == "csv_slice" || s == "csv") return ExportFormat::csv_slice;
  throw JfError("export: unknown format '" + s + "'");
}

const char* export_format_name(ExportFormat f) {
  switch (f) {
    case ExportFormat::pf1: return "pf1";
    case ExportFormat::vtk_legacy: return "vtk_legacy";
    case ExportFormat::csv_slice: return "csv_slice";
  }
  return "unknown";
}

void write_pf1(const std::string& path, const Field& f) {
  Field w = f;
  w.materialize();
  std::ofstream os(path, std::ios::binary);
  require_stream(os, "pf1 write", path);
  os.write("PF1\0", 4);
  put_u32(os, std::uint32_t(w.rank));
  put_u32(os, std::uint32_t(w.grid.n));
  put_u32(os, std::uint32_t(w.comps()));
  put_f64(os, w.grid.box);
  const int nc = w.comps();
  for (std::size_t m = 0; m < w.grid.n3(); ++m)
    for (int c = 0; c < nc; ++c) put_f64(os, w.at(c, m));
  require_stream(os, "pf1 write", path);
}

Field read_pf1(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require_stream(is, "pf1 read", path);
  char magic[4];
  is.read(magic, 4);
  require(is && std::memcmp(magic, "PF1\0", 4) == 0,
          "pf1 read: bad magic in '" + path + "'");
  const std::uint32_t rank_code = get_u32(is);
  const std::uint32_t n = get_u32(is);
  const std::uint32_t nc = get_u32(is);
  const Real box = get_f64(is);
  require(rank_code <= 2, "pf1 read: bad rank code");
  Rank rank = Rank(rank_code);
  require(nc == std::uint32_t(rank_comps(rank)),
          "pf1 read: component count does not match rank");
  require(n > 0, "pf1 read: empty grid");
  Field f{Grid3{int(n), box}, rank};
  for (std::size_t m = 0; m < f.grid.n3(); ++m)
    for (std::uint32_t c = 0; c < nc; ++c) f.at(int(c), m) = get_f64(is);
  require_stream(is, "pf1 read", path);
  return f;
}

void write_vtk_legacy(const std::string& path, const Field& f,
                      const std::string& name) {
  Field w = f;
  w.materialize();
  std::ofstream os(path);
  require_stream(os, "vtk write", path);
  const int n = w.grid.n;
  os << "# vtk DataFile Version 3.0\n"
     << name << "\n"
     << "ASCII\n"
     << "DATASET STRUCTURED_POINTS\n"
     << "DIMENSIONS " << n << " " << n << " " << n << "\n"
     << "ORIGIN 0 0 0\n"
     << "SPACING " << fmt_real17(w.grid.dx()) << " " << fmt_real17(w.grid.dx())
     << " " << fmt_real17(w.grid.dx()) << "\n"
     << "POINT_DATA " << w.grid.n3() << "\n";
  const int nc = w.comps();
  if (w.rank == Rank::scalar) {
    os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (std::size_t m = 0; m < w.grid.n3(); ++m)
      os << fmt_real17(w.at(0, m)) << "\n";
  } else if (w.rank == Rank::vector3) {
    os << "VECTORS " << name << " double\n";
    for (std::size_t m = 0; m < w.grid.n3(); ++m)
      os << fmt_real17(w.at(0, m)) << " " << fmt_real17(w.at(1, m)) << " "
         << fmt_real17(w.at(2, m)) << "\n";
  } else {
    os << "FIELD " << name << " 1\ncomponents " << nc << " " << w.grid.n3()
       << " double\n";
    for (std::size_t m = 0; m < w.grid.n3(); ++m) {
      for (int c = 0; c < nc; ++c)
        os << fmt_real17(w.at(c, m)) << (c + 1 < nc ? " " : "\n");
    }
  }
  require_stream(os, "vtk write", path);
}

void write_csv_slice(const std::string& path, const Field& f, int iz) {
  Field w = f;
  w.materialize();
  require(iz >= 0 && iz < w.grid.n, "csv_slice: z index out of range");
  std::ofstream os(path);
  require_stream(os, "csv_slice write", path);
  for (int c = 0; c < w.comps(); ++c)
    for (int iy = 0; iy < w.grid.n; ++iy) {
      for (int ix = 0; ix < w.grid.n; ++ix)
        os << fmt_real17(w.at(c, w.grid.idx(ix, iy, iz)))
           << (ix + 1 < w.grid.n ? "," : "\n");
    }
  require_stream(os, "csv_slice write", path);
}

void export_field(const std::string& path, const Field& f, ExportFormat fmt) {
  switch (fmt) {
    case ExportFormat::pf1: write_pf1(path, f); return;
    case ExportFormat::vtk_legacy: write_vtk_legacy(path, f); return;
    case ExportFormat::csv_slice: write_csv_slice(path, f); return;
  }
  throw JfError("export: unknown format code");
}

// ---------------------------------------------------------------------------
// CSV helpers

std::string fmt_real17(Real v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_quote(const std::string& cell) {
  if (cell.find_first_of(",\"\r\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream os(path);
  require_stream(os, "text write", path);
  os << body;
  require_stream(os, "text write", path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream is(path);
  require_stream(is, "text read", path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

// ---------------------------------------------------------------------------
// energy profile

std::function<Real(Real)> energy_function(const EnergySpec& spec) {
  if (spec.selector == "one_minus_cos_k") {
    const Real k = spec.k, v = spec.value;
    return [k, v](Real t) { return v * (1.0 - std::cos(k * t)); };
  }
  if (spec.selector == "constant") {
    const Real v = spec.value;
    return [v](Real) { return v; };
  }
  if (spec.selector == "tabulated") {
    std::istringstream is(read_text_file(spec.table_path));
    std::vector<Real> ts, es;
    std::string line;
    while (std::getline(is, line)) {
      line = trim(line);
      if (line.empty() || line[0] == '#') continue;
      auto comma = line.find(',');
      require(comma != std::string::npos,
              "energy table: expected 't,e' rows in '" + spec.table_path + "'");
      ts.push_back(parse_number(trim(line.substr(0, comma))));
      es.push_back(parse_number(trim(line.substr(comma + 1))));
    }
    require(ts.size() >= 2, "energy table: need at least two rows");
    for (std::size_t i = 1; i < ts.size(); ++i)
      require(ts[i] > ts[i - 1], "energy table: times must increase");
    return [ts, es](Real t) {
      if (t <= ts.front()) return es.front();
      if (t >= ts.back()) return es.back();
      std::size_t i = 1;
      while (ts[i] < t) ++i;
      const Real w = (t - ts[i - 1]) / (ts[i] - ts[i - 1]);
      return (1.0 - w) * es[i - 1] + w * es[i];
    };
  }
  throw JfError("energy: unknown selector '" + spec.selector + "'");
}

std::vector<Real> sample_energy(const EnergySpec& spec, Real t0, Real t1,
                                int n_t) {
  require(n_t >= 2, "energy: need at least two time nodes");
  auto e = energy_function(spec);
  std::vector<Real> out(static_cast<std::size_t>(n_t), 0.0);
  for (int i = 0; i < n_t; ++i)
    out[std::size_t(i)] = e(t0 + (t1 - t0) * Real(i) / Real(n_t - 1));
  return out;
}

// ---------------------------------------------------------------------------
// run configuration

std::string run_config_to_text(const RunConfig& c) {
  std::ostringstream os;
  os << "[ledger]\n" << ledger_to_text(c.ledger);
  os << "[jets]\n"
     << "lambda = " << fmt_real17(c.jets.lambda) << "\n"
     << "sigma = " << fmt_real17(c.jets.sigma) << "\n"
     << "r = " << fmt_real17(c.jets.r) << "\n"
     << "mu = " << fmt_real17(c.jets.mu) << "\n"
     << "n_lambda = " << c.jets.n_lambda << "\n"
     << "q = " << fmt_real17(c.jets.q) << "\n"
     << "profile = " << c.profile_shape << "\n"
     << "family = " << c.family << "\n";
  os << "[grid]\n"
     << "n = " << c.grid_n << "\n"
     << "n_t = " << c.n_t << "\n"
     << "T = " << fmt_real17(c.T) << "\n";
  os << "[energy]\n"
     << "selector = " << c.energy.selector << "\n"
     << "k = " << fmt_real17(c.energy.k) << "\n"
     << "value = " << fmt_real17(c.energy.value) << "\n";
  if (!c.energy.table_path.empty())
    os << "table = " << c.energy.table_path << "\n";
  os << "[output]\n"
     << "directory = " << c.output.directory << "\n"
     << "formats = ";
  for (std::size_t i = 0; i < c.output.formats.size(); ++i)
    os << c.output.formats[i] << (i + 1 < c.output.formats.size() ? "," : "");
  os << "\n"
     << "seed = " << c.seed << "\n";
  return os.str();
}

RunConfig run_config_from_text(const std::string& text) {
  RunConfig c;
  std::istringstream is(text);
  std::string line, section, ledger_lines;
  while (std::getline(is, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      require(line.back() == ']', "config: malformed section '" + line + "'");
      section = line.substr(1, line.size() - 2);
      continue;
    }
    auto eq = line.find('=');
    require(eq != std::string::npos,
            "config: expected 'key = value', got '" + line + "'");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (section == "ledger") {
      ledger_lines += key + " = " + val + "\n";
    } else if (section == "jets") {
      if (key == "lambda") c.jets.lambda = parse_number(val);
      else if (key == "sigma") c.jets.sigma = parse_number(val);
      else if (key == "r") c.jets.r = parse_number(val);
      else if (key == "mu") c.jets.mu = parse_number(val);
      else if (key == "n_lambda") c.jets.n_lambda = std::stoll(val);
      else if (key == "q") c.jets.q = parse_number(val);
      else if (key == "profile") c.profile_shape = val;
      else if (key == "family") c.family = std::stoi(val);
      else throw JfError("config: unknown jets key '" + key + "'");
    } else if (section == "grid") {
      if (key == "n") c.grid_n = std::stoll(val);
      else if (key == "n_t") c.n_t = std::stoll(val);
      else if (key == "T") c.T = parse_number(val);
      else throw JfError("config: unknown grid key '" + key + "'");
    } else if (section == "energy") {
      if (key == "selector") c.energy.selector = val;
      else if (key == "k") c.energy.k = parse_number(val);
      else if (key == "value") c.energy.value = parse_number(val);
      else if (key == "table") c.energy.table_path = val;
      else throw JfError("config: unknown energy key '" + key + "'");
    } else if (section == "output") {
      if (key == "directory") c.output.directory = val;
      else if (key == "formats") {
        c.output.formats.clear();
        std::istringstream fs(val);
        std::string tok;
        while (std::getline(fs, tok, ',')) {
          tok = trim(tok);
          if (!tok.empty()) c.output.formats.push_back(tok);
        }
      } else if (key == "seed") {
        c.seed = std::stoull(val);
      } else {
        throw JfError("config: unknown output key '" + key + "'");
      }
    } else {
      throw JfError("config: key '" + key + "' outside any known section");
    }
  }
  c.ledger = ledger_from_text(ledger_lines);
  return c;
}

RunConfig load_run_config(const std::string& path) {
  return run_config_from_text(read_text_file(path));
}

}  // namespace jetforge
