#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hots/macro_solver.hpp"
#include "hots/materials.hpp"

namespace hots {

// ---------------------------------------------------------------------------
// Minimal INI reader: [section] headers, key = value lines, comments with
// '#' or ';'. Line numbers are kept for diagnostics.
// ---------------------------------------------------------------------------

struct IniFile {
  struct Entry {
    std::string value;
    int line = 0;
  };
  std::map<std::string, std::map<std::string, Entry>> sections;

  static IniFile parse(std::istream& in) {
    IniFile f;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const size_t c = line.find_first_of("#;");
      if (c != std::string::npos) line.erase(c);
      const size_t b = line.find_first_not_of(" \t\r");
      if (b == std::string::npos) continue;
      const size_t e = line.find_last_not_of(" \t\r");
      line = line.substr(b, e - b + 1);
      if (line.front() == '[') {
        if (line.back() != ']')
          throw std::runtime_error("line " + std::to_string(lineno) +
                                   ": unterminated section header");
        section = line.substr(1, line.size() - 2);
        f.sections[section];
        continue;
      }
      const size_t eq = line.find('=');
      if (eq == std::string::npos)
        throw std::runtime_error("line " + std::to_string(lineno) +
                                 ": expected key = value");
      auto trim = [](std::string s) {
        const size_t a = s.find_first_not_of(" \t");
        if (a == std::string::npos) return std::string();
        const size_t z = s.find_last_not_of(" \t");
        return s.substr(a, z - a + 1);
      };
      f.sections[section][trim(line.substr(0, eq))] =
          Entry{trim(line.substr(eq + 1)), lineno};
    }
    return f;
  }

  bool has(const std::string& sec) const { return sections.count(sec) > 0; }
  const Entry* find(const std::string& sec, const std::string& key) const {
    auto s = sections.find(sec);
    if (s == sections.end()) return nullptr;
    auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
  }
};

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

struct CellSpec {
  int mesh = 16;                       // n x n cells on the unit square
  std::string matrix;                  // material name
  std::string inclusion;               // material name, or "@composite" for
                                       // the finer-scale composite (Y only)
  std::array<double, 4> box{0.25, 0.25, 0.75, 0.75};  // inclusion rectangle
};

struct RunConfig {
  double zeta1 = 1.0, zeta2 = 1.0;
  ThetaGrid grid{0.0, 1.0, 2};
  std::map<std::string, Material> materials;
  CellSpec cell_z, cell_y;

  int macro_mesh = 16;
  double Lx = 1.0, Ly = 1.0;

  double dt = 1e-2, t_end = 0.1;
  int output_every = 1;  // snapshot cadence in steps

  double theta_bc = 0.0, theta_init = 0.0;
  Vec2 theta_grad = Vec2::Zero();  // spatial slope of the boundary temperature
  Vec2 u_bc = Vec2::Zero();
  double heat = 0.0;
  Vec2 force = Vec2::Zero();

  StepperOptions solver;

  int reference_mesh = 32;
  std::string out_dir = "out";

  // 64-bit FNV-1a over the canonical echo of everything the offline stage
  // depends on; used as the table cache key.
  std::string offline_hash() const {
    std::ostringstream os;
    os.precision(17);
    os << zeta1 << '|' << zeta2 << '|' << grid.lo << '|' << grid.hi << '|'
       << grid.n << '|';
    for (const auto& [name, m] : materials) {
      os << name << '{';
      for (const Poly* p : {&m.rho, &m.c, &m.k, &m.E, &m.beta}) {
        for (double c : p->c) os << c << ',';
        os << ';';
      }
      os << m.nu << ';' << static_cast<int>(m.vmode) << ';' << m.vtheta_scale
         << '}';
    }
    for (const CellSpec* cs : {&cell_z, &cell_y}) {
      os << '[' << cs->mesh << ',' << cs->matrix << ',' << cs->inclusion;
      for (double v : cs->box) os << ',' << v;
      os << ']';
    }
    const std::string s = os.str();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 1099511628211ull;
    }
    std::ostringstream hex;
    hex << std::hex << h;
    return hex.str();
  }
};

namespace detail {

inline double parse_number(const std::string& s, const std::string& where,
                           std::vector<std::string>& errs) {
  // accepts plain decimals and fractions "p/q"
  const size_t slash = s.find('/');
  try {
    size_t used = 0;
    if (slash == std::string::npos) {
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    }
    const double p = std::stod(s.substr(0, slash), &used);
    const double q = std::stod(s.substr(slash + 1), &used);
    if (q == 0.0) throw std::invalid_argument(s);
    return p / q;
  } catch (const std::exception&) {
    errs.push_back(where + ": not a number: '" + s + "'");
    return 0.0;
  }
}

inline std::vector<double> parse_list(const std::string& s, const std::string& where,
                                      std::vector<std::string>& errs) {
  std::vector<double> v;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) v.push_back(parse_number(tok, where, errs));
  if (v.empty()) errs.push_back(where + ": empty value");
  return v;
}

}  // namespace detail

// Parses and validates a run configuration. All violations are collected and
// reported together; any violation raises std::runtime_error.
inline RunConfig parse_config_stream(std::istream& in) {
  const IniFile ini = IniFile::parse(in);
  RunConfig cfg;
  std::vector<std::string> errs;

  auto num = [&](const std::string& sec, const std::string& key, double dflt,
                 bool required = false) {
    const IniFile::Entry* e = ini.find(sec, key);
    if (!e) {
      if (required) errs.push_back("[" + sec + "] missing required key '" + key + "'");
      return dflt;
    }
    return detail::parse_number(e->value, "[" + sec + "] " + key, errs);
  };
  auto str = [&](const std::string& sec, const std::string& key,
                 const std::string& dflt, bool required = false) {
    const IniFile::Entry* e = ini.find(sec, key);
    if (!e) {
      if (required) errs.push_back("[" + sec + "] missing required key '" + key + "'");
      return dflt;
    }
    return e->value;
  };
  auto vec2 = [&](const std::string& sec, const std::string& key, Vec2 dflt) {
    const IniFile::Entry* e = ini.find(sec, key);
    if (!e) return dflt;
    const std::vector<double> v =
        detail::parse_list(e->value, "[" + sec + "] " + key, errs);
    if (v.size() != 2) {
      errs.push_back("[" + sec + "] " + key + ": expected two numbers");
      return dflt;
    }
    return Vec2(v[0], v[1]);
  };

  // materials
  for (const auto& [sec, kv] : ini.sections) {
    if (sec.rfind("material.", 0) != 0) continue;
    const std::string name = sec.substr(9);
    if (name.empty()) {
      errs.push_back("[" + sec + "]: empty material name");
      continue;
    }
    Material m;
    m.name = name;
    auto poly = [&](const std::string& key, Poly& dst) {
      const IniFile::Entry* e = ini.find(sec, key);
      if (!e) {
        errs.push_back("[" + sec + "] missing required key '" + key + "'");
        return;
      }
      dst.c = detail::parse_list(e->value, "[" + sec + "] " + key, errs);
    };
    poly("rho", m.rho);
    poly("c", m.c);
    poly("k", m.k);
    poly("E", m.E);
    poly("beta", m.beta);
    m.nu = num(sec, "nu", 0.3, true);
    const std::string vm = str(sec, "vartheta_mode", "theta_ref");
    if (vm == "theta_ref")
      m.vmode = VarthetaMode::ThetaRef;
    else if (vm == "gamma")
      m.vmode = VarthetaMode::Gamma;
    else if (vm == "zero")
      m.vmode = VarthetaMode::Zero;
    else
      errs.push_back("[" + sec + "] vartheta_mode: unknown mode '" + vm + "'");
    m.vtheta_scale = num(sec, "vartheta_scale", 1.0);
    cfg.materials[name] = m;
  }
  if (cfg.materials.empty()) errs.push_back("no [material.*] sections defined");

  // scales
  cfg.zeta1 = num("scales", "zeta1", 1.0, true);
  cfg.zeta2 = num("scales", "zeta2", 1.0, true);
  if (cfg.zeta1 <= 0 || cfg.zeta2 <= 0) {
    errs.push_back("[scales]: zeta1 and zeta2 must be positive");
  } else {
    const double r1 = 1.0 / cfg.zeta1;
    const double r2 = cfg.zeta1 / cfg.zeta2;
    if (std::abs(r1 - std::round(r1)) > 1e-9)
      errs.push_back("[scales]: 1/zeta1 must be a positive integer, got " +
                     std::to_string(r1));
    if (std::abs(r2 - std::round(r2)) > 1e-9)
      errs.push_back("[scales]: zeta1/zeta2 must be a positive integer, got " +
                     std::to_string(r2));
  }

  // temperature grid
  cfg.grid.lo = num("theta_grid", "lo", 0.0, true);
  cfg.grid.hi = num("theta_grid", "hi", 1.0, true);
  cfg.grid.n = static_cast<int>(num("theta_grid", "n", 2));
  if (cfg.grid.n < 2) errs.push_back("[theta_grid]: n must be >= 2");
  if (cfg.grid.hi <= cfg.grid.lo) errs.push_back("[theta_grid]: need hi > lo");

  // unit cells
  auto cell = [&](const std::string& sec, CellSpec& cs, bool composite_ok) {
    cs.mesh = static_cast<int>(num(sec, "mesh", cs.mesh));
    if (cs.mesh < 2) errs.push_back("[" + sec + "]: mesh must be >= 2");
    cs.matrix = str(sec, "matrix", "", true);
    cs.inclusion = str(sec, "inclusion", "", true);
    const IniFile::Entry* e = ini.find(sec, "inclusion_box");
    if (e) {
      const std::vector<double> v =
          detail::parse_list(e->value, "[" + sec + "] inclusion_box", errs);
      if (v.size() != 4)
        errs.push_back("[" + sec + "] inclusion_box: expected four numbers");
      else
        cs.box = {v[0], v[1], v[2], v[3]};
    }
    auto check = [&](const std::string& name, const std::string& key) {
      if (name.empty()) return;
      if (name == "@composite") {
        if (!composite_ok)
          errs.push_back("[" + sec + "] " + key +
                         ": '@composite' is only valid in the intermediate cell");
        return;
      }
      if (!cfg.materials.count(name))
        errs.push_back("[" + sec + "] " + key + ": unknown material '" + name + "'");
    };
    check(cs.matrix, "matrix");
    check(cs.inclusion, "inclusion");
  };
  cell("cell.Z", cfg.cell_z, false);
  cell("cell.Y", cfg.cell_y, true);

  // macro problem
  cfg.macro_mesh = static_cast<int>(num("macro", "mesh", cfg.macro_mesh));
  cfg.Lx = num("macro", "Lx", 1.0);
  cfg.Ly = num("macro", "Ly", 1.0);
  if (cfg.macro_mesh < 2) errs.push_back("[macro]: mesh must be >= 2");

  cfg.dt = num("time", "dt", cfg.dt);
  cfg.t_end = num("time", "t_end", cfg.t_end);
  cfg.output_every = static_cast<int>(num("time", "output_every", 1));
  if (cfg.dt <= 0) errs.push_back("[time]: dt must be positive");
  if (cfg.t_end < cfg.dt) errs.push_back("[time]: t_end must be >= dt");
  if (cfg.output_every < 1) errs.push_back("[time]: output_every must be >= 1");

  cfg.theta_bc = num("bc", "theta", 0.0, true);
  cfg.theta_init = num("bc", "theta_init", cfg.theta_bc);
  cfg.theta_grad = vec2("bc", "theta_grad", Vec2::Zero());
  cfg.u_bc = vec2("bc", "u", Vec2::Zero());

  cfg.heat = num("source", "heat", 0.0);
  cfg.force = vec2("source", "force", Vec2::Zero());

  cfg.solver.dt = cfg.dt;
  cfg.solver.tol_theta = num("solver", "tol_theta", 1e-6);
  cfg.solver.tol_u = num("solver", "tol_u", 1e-6);
  cfg.solver.max_iters = static_cast<int>(num("solver", "max_iters", 50));
  cfg.solver.varpi = num("solver", "varpi", 1.0);
  cfg.solver.theta_ref = num("solver", "theta_ref", cfg.theta_bc);

  cfg.reference_mesh = static_cast<int>(num("reference", "mesh", cfg.reference_mesh));
  if (cfg.reference_mesh < 2) errs.push_back("[reference]: mesh must be >= 2");

  cfg.out_dir = str("output", "dir", cfg.out_dir);

  if (!errs.empty()) {
    std::string msg = "invalid configuration:";
    for (const std::string& e : errs) msg += "\n  - " + e;
    throw std::runtime_error(msg);
  }
  return cfg;
}

inline RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  return parse_config_stream(in);
}

}  // namespace hots
