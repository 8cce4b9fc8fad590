#pragma once

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hots/cell_problems.hpp"
#include "hots/materials.hpp"
#include "hots/mesh.hpp"

namespace hots {

// ---------------------------------------------------------------------------
// Temperature-sampled table of cell functions and effective coefficients for
// one unit cell. Built offline over a uniform temperature grid, interpolated
// linearly online; derivative queries return the within-interval slope.
// ---------------------------------------------------------------------------

enum class TableKind { Micro, Meso };

struct CellTable {
  TableKind kind = TableKind::Micro;
  ThetaGrid grid;
  TriMesh mesh;
  std::vector<FieldSet> fields;            // per sample, all solved correctors
  std::vector<PointCoefficients> eff;      // per sample
  std::vector<PointCoefficients> deff;     // d/dtheta of eff, finite differences

  const FirstOrderNames& names() const {
    static const FirstOrderNames micro{};
    static const FirstOrderNames meso = MesoNames{}.first;
    return kind == TableKind::Micro ? micro : meso;
  }

  PointCoefficients eff_at(double theta) const {
    int i0;
    double w;
    grid.locate(theta, i0, w);
    if (w == 0.0) return eff[i0];
    return lincomb(1.0 - w, eff[i0], w, eff[i0 + 1]);
  }

  // d/dtheta of the interpolated coefficients: constant slope per interval.
  PointCoefficients eff_slope_at(double theta) const {
    if (grid.n < 2) return PointCoefficients{};
    int i0;
    double w;
    grid.locate(theta, i0, w);
    if (i0 + 1 >= grid.n) i0 = grid.n - 2;
    return lincomb(1.0 / grid.step(), eff[i0 + 1], -1.0 / grid.step(), eff[i0]);
  }

  Eigen::VectorXd scalar_at(const std::string& name, double theta) const {
    int i0;
    double w;
    grid.locate(theta, i0, w);
    if (w == 0.0) return fields[i0].s(name);
    return (1.0 - w) * fields[i0].s(name) + w * fields[i0 + 1].s(name);
  }

  Eigen::VectorXd vector_at(const std::string& name, double theta) const {
    int i0;
    double w;
    grid.locate(theta, i0, w);
    if (w == 0.0) return fields[i0].v(name);
    return (1.0 - w) * fields[i0].v(name) + w * fields[i0 + 1].v(name);
  }

  Eigen::VectorXd scalar_slope_at(const std::string& name, double theta) const {
    if (grid.n < 2) return Eigen::VectorXd::Zero(fields[0].s(name).size());
    int i0;
    double w;
    grid.locate(theta, i0, w);
    if (i0 + 1 >= grid.n) i0 = grid.n - 2;
    return (fields[i0 + 1].s(name) - fields[i0].s(name)) / grid.step();
  }

  Eigen::VectorXd vector_slope_at(const std::string& name, double theta) const {
    if (grid.n < 2) return Eigen::VectorXd::Zero(fields[0].v(name).size());
    int i0;
    double w;
    grid.locate(theta, i0, w);
    if (i0 + 1 >= grid.n) i0 = grid.n - 2;
    return (fields[i0 + 1].v(name) - fields[i0].v(name)) / grid.step();
  }

  void save(const std::string& dir, const std::string& config_hash = "") const;
  static CellTable load(const std::string& dir);
};

// Finite differences across the sample axis: central inside, one-sided at the
// ends, zero for a single sample.
template <class T, class Diff>
std::vector<T> sample_fd(const std::vector<T>& v, double h, Diff&& diff, const T& zero) {
  const int n = static_cast<int>(v.size());
  std::vector<T> d(n, zero);
  if (n < 2) return d;
  for (int i = 0; i < n; ++i) {
    if (i == 0)
      d[i] = diff(v[1], v[0], h);
    else if (i == n - 1)
      d[i] = diff(v[n - 1], v[n - 2], h);
    else
      d[i] = diff(v[i + 1], v[i - 1], 2 * h);
  }
  return d;
}

inline std::vector<PointCoefficients> coeff_fd(const std::vector<PointCoefficients>& v,
                                               double h) {
  return sample_fd(v, h,
                   [](const PointCoefficients& a, const PointCoefficients& b, double hh) {
                     return lincomb(1.0 / hh, a, -1.0 / hh, b);
                   },
                   PointCoefficients{});
}

inline std::vector<FieldSet> fieldset_fd(const std::vector<FieldSet>& v, double h) {
  FieldSet zero;
  return sample_fd(v, h,
                   [](const FieldSet& a, const FieldSet& b, double hh) {
                     FieldSet d;
                     for (const auto& [k, x] : a.scalar) d.scalar[k] = (x - b.s(k)) / hh;
                     for (const auto& [k, x] : a.vector) d.vector[k] = (x - b.v(k)) / hh;
                     return d;
                   },
                   zero);
}

// ---------------------------------------------------------------------------
// Offline build. `owner[t]` is the material of element t; for a meso cell,
// a null owner marks elements occupied by the micro composite, whose
// coefficients come from the micro table at each sample temperature.
// ---------------------------------------------------------------------------

inline CellTable build_cell_table(TableKind kind, TriMesh mesh,
                                  const std::vector<const Material*>& owner,
                                  const ThetaGrid& grid,
                                  const CellTable* micro = nullptr) {
  if (static_cast<int>(owner.size()) != mesh.num_tris())
    throw std::runtime_error("build_cell_table: owner size mismatch");
  for (const auto* o : owner)
    if (o == nullptr && micro == nullptr)
      throw std::runtime_error("build_cell_table: composite element without micro table");

  CellTable tab;
  tab.kind = kind;
  tab.grid = grid;
  tab.mesh = std::move(mesh);
  const FirstOrderNames& nm = tab.names();
  const int nt = tab.mesh.num_tris();

  std::vector<CellFEM> cells(grid.n);
  std::vector<FieldSet> first(grid.n);
  tab.eff.resize(grid.n);
  for (int s = 0; s < grid.n; ++s) {
    const double th = grid.sample(s);
    std::vector<PointCoefficients> c(nt), dc(nt);
    for (int t = 0; t < nt; ++t) {
      if (owner[t]) {
        c[t] = owner[t]->evaluate(th);
        dc[t] = owner[t]->evaluate_dtheta(th);
      } else {
        c[t] = micro->eff[s];
        dc[t] = micro->deff[s];
      }
    }
    cells[s].init(tab.mesh, std::move(c), std::move(dc));
    solve_first_order(cells[s], first[s], nm);
    tab.eff[s] = homogenize(cells[s], first[s], nm);
  }

  tab.deff = coeff_fd(tab.eff, grid.step());
  std::vector<FieldSet> dfirst = fieldset_fd(first, grid.step());
  if (grid.n < 2) {
    // keep the derivative field names present so lookups stay uniform
    for (auto& [k, v] : first[0].scalar) dfirst[0].scalar[k] = Eigen::VectorXd::Zero(v.size());
    for (auto& [k, v] : first[0].vector) dfirst[0].vector[k] = Eigen::VectorXd::Zero(v.size());
  }

  tab.fields.resize(grid.n);
  for (int s = 0; s < grid.n; ++s) {
    tab.fields[s] = first[s];
    if (kind == TableKind::Micro)
      solve_micro_second_order(cells[s], first[s], dfirst[s], tab.eff[s], tab.deff[s],
                               tab.fields[s]);
    else
      solve_meso_second_order(cells[s], first[s], dfirst[s], tab.eff[s], tab.deff[s],
                              tab.fields[s]);
  }
  return tab;
}

// ---------------------------------------------------------------------------
// On-disk cache: manifest.json with grid, mesh, coefficients and field names;
// fields.bin holds raw doubles in manifest order (sample-major, fields in
// deterministic map order).
// ---------------------------------------------------------------------------

namespace detail {

inline nlohmann::json coeffs_to_json(const PointCoefficients& p) {
  nlohmann::json j;
  j["rho"] = p.rho;
  j["rc"] = p.rc;
  auto mat2 = [](const Eigen::Matrix2d& m) {
    return std::vector<double>{m(0, 0), m(0, 1), m(1, 0), m(1, 1)};
  };
  j["k"] = mat2(p.k);
  j["beta"] = mat2(p.beta);
  j["vartheta"] = mat2(p.vartheta);
  std::vector<double> C(9);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) C[3 * a + b] = p.C(a, b);
  j["C"] = C;
  return j;
}

inline PointCoefficients coeffs_from_json(const nlohmann::json& j) {
  PointCoefficients p;
  p.rho = j.at("rho");
  p.rc = j.at("rc");
  auto mat2 = [](const nlohmann::json& v) {
    Eigen::Matrix2d m;
    m << v[0], v[1], v[2], v[3];
    return m;
  };
  p.k = mat2(j.at("k"));
  p.beta = mat2(j.at("beta"));
  p.vartheta = mat2(j.at("vartheta"));
  const auto& C = j.at("C");
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) p.C(a, b) = C[3 * a + b];
  return p;
}

inline void write_mesh(nlohmann::json& j, const TriMesh& m) {
  std::vector<double> nodes;
  nodes.reserve(2 * m.num_nodes());
  for (const auto& p : m.nodes) {
    nodes.push_back(p[0]);
    nodes.push_back(p[1]);
  }
  j["nodes"] = nodes;
  std::vector<int> tris;
  tris.reserve(4 * m.num_tris());
  for (const auto& t : m.tris) {
    tris.push_back(t.v[0]);
    tris.push_back(t.v[1]);
    tris.push_back(t.v[2]);
    tris.push_back(t.region);
  }
  j["tris"] = tris;
  j["region_names"] = m.region_names;
  std::vector<int> be;
  for (const auto& e : m.bedges) {
    be.push_back(e.a);
    be.push_back(e.b);
    be.push_back(e.tag);
  }
  j["bedges"] = be;
  j["tag_names"] = m.tag_names;
}

inline TriMesh read_mesh(const nlohmann::json& j) {
  TriMesh m;
  const auto& nodes = j.at("nodes");
  for (size_t i = 0; i + 1 < nodes.size(); i += 2)
    m.nodes.emplace_back(double(nodes[i]), double(nodes[i + 1]));
  const auto& tris = j.at("tris");
  for (size_t i = 0; i + 3 < tris.size(); i += 4)
    m.tris.push_back({{int(tris[i]), int(tris[i + 1]), int(tris[i + 2])}, int(tris[i + 3])});
  m.region_names = j.at("region_names").get<std::vector<std::string>>();
  const auto& be = j.at("bedges");
  for (size_t i = 0; i + 2 < be.size(); i += 3)
    m.bedges.push_back({int(be[i]), int(be[i + 1]), int(be[i + 2])});
  m.tag_names = j.at("tag_names").get<std::vector<std::string>>();
  return m;
}

}  // namespace detail

inline void CellTable::save(const std::string& dir, const std::string& config_hash) const {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json j;
  j["version"] = 1;
  j["config_hash"] = config_hash;
  j["kind"] = kind == TableKind::Micro ? "micro" : "meso";
  j["theta"] = {{"lo", grid.lo}, {"hi", grid.hi}, {"n", grid.n}};
  detail::write_mesh(j["mesh"], mesh);
  std::vector<std::string> snames, vnames;
  for (const auto& [k, v] : fields[0].scalar) snames.push_back(k);
  for (const auto& [k, v] : fields[0].vector) vnames.push_back(k);
  j["scalar_fields"] = snames;
  j["vector_fields"] = vnames;
  for (int s = 0; s < grid.n; ++s) {
    j["eff"].push_back(detail::coeffs_to_json(eff[s]));
    j["deff"].push_back(detail::coeffs_to_json(deff[s]));
  }
  std::ofstream mf(fs::path(dir) / "manifest.json");
  mf << j.dump(1) << "\n";

  std::ofstream bf(fs::path(dir) / "fields.bin", std::ios::binary);
  for (int s = 0; s < grid.n; ++s) {
    for (const auto& nmk : snames) {
      const auto& v = fields[s].s(nmk);
      bf.write(reinterpret_cast<const char*>(v.data()),
               static_cast<std::streamsize>(sizeof(double) * v.size()));
    }
    for (const auto& nmk : vnames) {
      const auto& v = fields[s].v(nmk);
      bf.write(reinterpret_cast<const char*>(v.data()),
               static_cast<std::streamsize>(sizeof(double) * v.size()));
    }
  }
}

inline CellTable CellTable::load(const std::string& dir) {
  namespace fs = std::filesystem;
  std::ifstream mf(fs::path(dir) / "manifest.json");
  if (!mf) throw std::runtime_error("cell table manifest not found in " + dir);
  nlohmann::json j;
  mf >> j;
  CellTable tab;
  tab.kind = j.at("kind") == "micro" ? TableKind::Micro : TableKind::Meso;
  tab.grid = ThetaGrid{j.at("theta").at("lo"), j.at("theta").at("hi"), j.at("theta").at("n")};
  tab.mesh = detail::read_mesh(j.at("mesh"));
  const auto snames = j.at("scalar_fields").get<std::vector<std::string>>();
  const auto vnames = j.at("vector_fields").get<std::vector<std::string>>();
  for (const auto& e : j.at("eff")) tab.eff.push_back(detail::coeffs_from_json(e));
  for (const auto& e : j.at("deff")) tab.deff.push_back(detail::coeffs_from_json(e));

  std::ifstream bf(fs::path(dir) / "fields.bin", std::ios::binary);
  if (!bf) throw std::runtime_error("cell table fields.bin not found in " + dir);
  const int n = tab.mesh.num_nodes();
  tab.fields.resize(tab.grid.n);
  for (int s = 0; s < tab.grid.n; ++s) {
    for (const auto& nmk : snames) {
      Eigen::VectorXd v(n);
      bf.read(reinterpret_cast<char*>(v.data()),
              static_cast<std::streamsize>(sizeof(double) * n));
      tab.fields[s].scalar[nmk] = std::move(v);
    }
    for (const auto& nmk : vnames) {
      Eigen::VectorXd v(2 * n);
      bf.read(reinterpret_cast<char*>(v.data()),
              static_cast<std::streamsize>(sizeof(double) * 2 * n));
      tab.fields[s].vector[nmk] = std::move(v);
    }
  }
  if (!bf) throw std::runtime_error("cell table fields.bin truncated in " + dir);
  return tab;
}

// Reads just the config hash of a cached table (empty when absent).
inline std::string cached_table_hash(const std::string& dir) {
  std::ifstream mf(std::filesystem::path(dir) / "manifest.json");
  if (!mf) return "";
  nlohmann::json j;
  mf >> j;
  return j.value("config_hash", "");
}

}  // namespace hots
