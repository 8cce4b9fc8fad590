#pragma once

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hots/config.hpp"
#include "hots/macro_solver.hpp"
#include "hots/reconstruction.hpp"
#include "hots/reference.hpp"
#include "hots/tables.hpp"

namespace hots {

// ---------------------------------------------------------------------------
// Snapshot series persistence: a JSON manifest next to a flat binary blob.
// Derivative arrays may be absent (reconstructed series carry values only).
// ---------------------------------------------------------------------------

inline void save_snapshots(const std::string& dir,
                           const std::vector<FieldSnapshot>& snaps) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json j;
  j["count"] = snaps.size();
  j["ntheta"] = snaps.empty() ? 0 : snaps.front().theta.size();
  j["nu"] = snaps.empty() ? 0 : snaps.front().u.size();
  j["nder"] = snaps.empty() ? 0 : snaps.front().theta_dot.size();
  std::vector<double> times;
  std::vector<int> iters;
  for (const auto& s : snaps) {
    times.push_back(s.t);
    iters.push_back(s.iters);
  }
  j["times"] = times;
  j["iters"] = iters;
  std::ofstream(dir + "/snapshots.json") << j.dump(1) << "\n";

  std::ofstream os(dir + "/snapshots.bin", std::ios::binary);
  auto put = [&](const Eigen::VectorXd& v) {
    os.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(v.size() * sizeof(double)));
  };
  for (const auto& s : snaps) {
    put(s.theta);
    put(s.u);
    put(s.theta_dot);
    put(s.u_dot);
    put(s.u_ddot);
  }
}

inline std::vector<FieldSnapshot> load_snapshots(const std::string& dir) {
  std::ifstream jf(dir + "/snapshots.json");
  if (!jf) throw std::runtime_error("missing artifact: " + dir + "/snapshots.json");
  nlohmann::json j;
  jf >> j;
  const int count = j.at("count");
  const int ntheta = j.at("ntheta");
  const int nu = j.at("nu");
  const int nder = j.at("nder");
  std::ifstream is(dir + "/snapshots.bin", std::ios::binary);
  if (!is) throw std::runtime_error("missing artifact: " + dir + "/snapshots.bin");
  auto get = [&](int n) {
    Eigen::VectorXd v(n);
    is.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
    if (!is) throw std::runtime_error("truncated artifact: " + dir + "/snapshots.bin");
    return v;
  };
  std::vector<FieldSnapshot> snaps(count);
  for (int i = 0; i < count; ++i) {
    snaps[i].t = j.at("times")[i];
    snaps[i].iters = j.at("iters")[i];
    snaps[i].theta = get(ntheta);
    snaps[i].u = get(nu);
    snaps[i].theta_dot = get(nder);
    snaps[i].u_dot = get(2 * nder);
    snaps[i].u_ddot = get(2 * nder);
  }
  return snaps;
}

// ---------------------------------------------------------------------------
// Error report
// ---------------------------------------------------------------------------

struct ErrorRow {
  double t = 0;
  std::string variant;  // homogenized | two_scale | three_scale_low | three_scale_high
  std::string field;    // theta | u
  std::string norm;     // l2 | h1
  double value = 0;
};
using ErrorReport = std::vector<ErrorRow>;

inline void write_error_csv(const std::string& path, const ErrorReport& rows) {
  std::ofstream os(path);
  os << "t,variant,field,norm,value\n";
  os.precision(12);
  for (const auto& r : rows)
    os << r.t << ',' << r.variant << ',' << r.field << ',' << r.norm << ','
       << r.value << "\n";
}

inline const char* variant_name(ReconVariant v) {
  switch (v) {
    case ReconVariant::Homogenized: return "homogenized";
    case ReconVariant::TwoScale: return "two_scale";
    case ReconVariant::ThreeScaleLow: return "three_scale_low";
    case ReconVariant::ThreeScaleHigh: return "three_scale_high";
  }
  return "?";
}

constexpr std::array<ReconVariant, 4> kAllVariants = {
    ReconVariant::Homogenized, ReconVariant::TwoScale,
    ReconVariant::ThreeScaleLow, ReconVariant::ThreeScaleHigh};

// ---------------------------------------------------------------------------
// Stage pipeline
// ---------------------------------------------------------------------------

class Pipeline {
 public:
  explicit Pipeline(RunConfig cfg) : cfg_(std::move(cfg)) {}

  const RunConfig& config() const { return cfg_; }
  std::string tables_dir(char which) const {
    return cfg_.out_dir + "/tables/" + which;
  }

  // Builds both cell tables unless a cached build with a matching config
  // hash is already on disk. Returns true when the cache was reused.
  bool offline() {
    const std::string hash = cfg_.offline_hash();
    if (cached_table_hash(tables_dir('Z')) == hash &&
        cached_table_hash(tables_dir('Y')) == hash)
      return true;
    TriMesh zmesh = build_rect_mesh(cfg_.cell_z.mesh, cfg_.cell_z.mesh, 1.0, 1.0);
    CellTable micro = build_cell_table(TableKind::Micro, zmesh,
                                       cell_owner(zmesh, cfg_.cell_z), cfg_.grid);
    micro.save(tables_dir('Z'), hash);
    TriMesh ymesh = build_rect_mesh(cfg_.cell_y.mesh, cfg_.cell_y.mesh, 1.0, 1.0);
    CellTable meso = build_cell_table(TableKind::Meso, ymesh,
                                      cell_owner(ymesh, cfg_.cell_y), cfg_.grid,
                                      &micro);
    meso.save(tables_dir('Y'), hash);
    return false;
  }

  CellTable load_table(char which) const {
    const std::string dir = tables_dir(which);
    if (cached_table_hash(dir).empty())
      throw std::runtime_error("missing artifact: cell table " + dir +
                               " (run the offline stage first)");
    return CellTable::load(dir);
  }

  // Coarse transient run with homogenized coefficients.
  std::vector<FieldSnapshot> online() {
    CellTable meso = load_table('Y');
    TriMesh mesh = build_rect_mesh(cfg_.macro_mesh, cfg_.macro_mesh, cfg_.Lx, cfg_.Ly);
    std::vector<FieldSnapshot> snaps = run_transient(mesh, table_provider(meso));
    save_snapshots(cfg_.out_dir + "/online", snaps);
    return snaps;
  }

  // Fully resolved transient run on the fine mesh.
  std::vector<FieldSnapshot> reference() {
    TriMesh mesh =
        build_rect_mesh(cfg_.reference_mesh, cfg_.reference_mesh, cfg_.Lx, cfg_.Ly);
    std::vector<FieldSnapshot> snaps =
        run_transient(mesh, resolved_provider(fine_owner(mesh)));
    save_snapshots(cfg_.out_dir + "/reference", snaps);
    return snaps;
  }

  // Evaluates every reconstruction family at the fine-mesh nodes for each
  // saved coarse snapshot, one artifact directory per family.
  void reconstruct() {
    CellTable meso = load_table('Y');
    CellTable micro = load_table('Z');
    std::vector<FieldSnapshot> coarse = load_snapshots(cfg_.out_dir + "/online");
    TriMesh macro = build_rect_mesh(cfg_.macro_mesh, cfg_.macro_mesh, cfg_.Lx, cfg_.Ly);
    TriMesh fine =
        build_rect_mesh(cfg_.reference_mesh, cfg_.reference_mesh, cfg_.Lx, cfg_.Ly);

    ReconstructionOptions ropt{cfg_.zeta1, cfg_.zeta2, cfg_.solver.theta_ref, {}};
    if (cfg_.cell_y.inclusion == "@composite") {
      const std::array<double, 4> box = cfg_.cell_y.box;
      ropt.micro_region = [box](const Vec2& p) { return in_box(p, box); };
    }
    Reconstructor rec(macro, meso, micro, ropt);
    const std::vector<ReconPoint> pts = rec.prepare(fine.nodes);

    for (ReconVariant v : kAllVariants) {
      std::vector<FieldSnapshot> out;
      out.reserve(coarse.size());
      for (const FieldSnapshot& s : coarse) {
        MacroState ms = make_macro_state(macro, s);
        ReconResult r = rec.evaluate(v, ms, pts);
        FieldSnapshot rs;
        rs.t = s.t;
        rs.theta = std::move(r.theta);
        rs.u = std::move(r.u);
        rs.theta_dot.resize(0);
        rs.u_dot.resize(0);
        rs.u_ddot.resize(0);
        out.push_back(std::move(rs));
      }
      save_snapshots(cfg_.out_dir + "/recon/" + variant_name(v), out);
    }
  }

  // Relative errors of every reconstruction family against the resolved run.
  ErrorReport compare() {
    TriMesh fine =
        build_rect_mesh(cfg_.reference_mesh, cfg_.reference_mesh, cfg_.Lx, cfg_.Ly);
    std::vector<FieldSnapshot> ref = load_snapshots(cfg_.out_dir + "/reference");
    ErrorReport report;
    for (ReconVariant v : kAllVariants) {
      std::vector<FieldSnapshot> rec =
          load_snapshots(cfg_.out_dir + "/recon/" + variant_name(v));
      if (rec.size() != ref.size())
        throw std::runtime_error("artifact mismatch: reference and reconstruction "
                                 "hold different snapshot counts");
      for (size_t i = 0; i < ref.size(); ++i) {
        if (std::abs(rec[i].t - ref[i].t) > 1e-10)
          throw std::runtime_error("artifact mismatch: snapshot times differ");
        const ErrorPair et = relative_errors(fine, ref[i].theta, rec[i].theta);
        const ErrorPair eu = relative_errors_vec(fine, ref[i].u, rec[i].u);
        report.push_back({ref[i].t, variant_name(v), "theta", "l2", et.l2});
        report.push_back({ref[i].t, variant_name(v), "theta", "h1", et.h1});
        report.push_back({ref[i].t, variant_name(v), "u", "l2", eu.l2});
        report.push_back({ref[i].t, variant_name(v), "u", "h1", eu.h1});
      }
    }
    std::filesystem::create_directories(cfg_.out_dir + "/compare");
    write_error_csv(cfg_.out_dir + "/compare/errors.csv", report);
    return report;
  }

  // Echoes the fully resolved configuration so a run can be reproduced from
  // its artifacts alone.
  void write_manifest() const {
    namespace fs = std::filesystem;
    fs::create_directories(cfg_.out_dir);
    nlohmann::json j;
    j["offline_hash"] = cfg_.offline_hash();
    j["scales"] = {{"zeta1", cfg_.zeta1}, {"zeta2", cfg_.zeta2}};
    j["theta_grid"] = {{"lo", cfg_.grid.lo}, {"hi", cfg_.grid.hi}, {"n", cfg_.grid.n}};
    for (const auto& [name, m] : cfg_.materials) {
      nlohmann::json mj;
      mj["rho"] = m.rho.c;
      mj["c"] = m.c.c;
      mj["k"] = m.k.c;
      mj["E"] = m.E.c;
      mj["beta"] = m.beta.c;
      mj["nu"] = m.nu;
      mj["vartheta_mode"] = static_cast<int>(m.vmode);
      mj["vartheta_scale"] = m.vtheta_scale;
      j["materials"][name] = mj;
    }
    auto cj = [](const CellSpec& c) {
      return nlohmann::json{{"mesh", c.mesh},
                            {"matrix", c.matrix},
                            {"inclusion", c.inclusion},
                            {"box", c.box}};
    };
    j["cell_Z"] = cj(cfg_.cell_z);
    j["cell_Y"] = cj(cfg_.cell_y);
    j["macro"] = {{"mesh", cfg_.macro_mesh}, {"Lx", cfg_.Lx}, {"Ly", cfg_.Ly}};
    j["time"] = {{"dt", cfg_.dt},
                 {"t_end", cfg_.t_end},
                 {"output_every", cfg_.output_every}};
    j["bc"] = {{"theta", cfg_.theta_bc},
               {"theta_init", cfg_.theta_init},
               {"theta_grad", {cfg_.theta_grad[0], cfg_.theta_grad[1]}},
               {"u", {cfg_.u_bc[0], cfg_.u_bc[1]}}};
    j["source"] = {{"heat", cfg_.heat}, {"force", {cfg_.force[0], cfg_.force[1]}}};
    j["solver"] = {{"tol_theta", cfg_.solver.tol_theta},
                   {"tol_u", cfg_.solver.tol_u},
                   {"max_iters", cfg_.solver.max_iters},
                   {"varpi", cfg_.solver.varpi},
                   {"theta_ref", cfg_.solver.theta_ref}};
    j["reference"] = {{"mesh", cfg_.reference_mesh}};
    std::ofstream(cfg_.out_dir + "/manifest.json") << j.dump(1) << "\n";
  }

  void run_stage(const std::string& stage) {
    write_manifest();
    if (stage == "offline") {
      offline();
    } else if (stage == "online") {
      online();
    } else if (stage == "reconstruct") {
      reconstruct();
    } else if (stage == "reference") {
      reference();
    } else if (stage == "compare") {
      compare();
    } else if (stage == "all") {
      offline();
      online();
      reference();
      reconstruct();
      compare();
    } else {
      throw std::runtime_error("unknown stage: " + stage);
    }
  }

  // Region assignment inside one unit cell: inclusion rectangle on a matrix
  // background. A null entry marks the finer-scale composite.
  std::vector<const Material*> cell_owner(const TriMesh& mesh,
                                          const CellSpec& cs) const {
    const Material* mat = &cfg_.materials.at(cs.matrix);
    const Material* inc =
        cs.inclusion == "@composite" ? nullptr : &cfg_.materials.at(cs.inclusion);
    std::vector<const Material*> o(mesh.num_tris());
    for (int t = 0; t < mesh.num_tris(); ++t)
      o[t] = in_box(mesh.centroid(t), cs.box) ? inc : mat;
    return o;
  }

  // Material assignment for the fully resolved fine mesh, folding each
  // element centroid through both periodic cells.
  std::vector<const Material*> fine_owner(const TriMesh& mesh) const {
    const CellSpec& y = cfg_.cell_y;
    const CellSpec& z = cfg_.cell_z;
    if (y.inclusion != "@composite") {
      // two-scale layout: the intermediate cell fully determines the phase
      const Material* mat = &cfg_.materials.at(y.matrix);
      const Material* inc = &cfg_.materials.at(y.inclusion);
      std::vector<const Material*> o(mesh.num_tris());
      for (int t = 0; t < mesh.num_tris(); ++t) {
        const Vec2 c = fold(mesh.centroid(t), cfg_.zeta1);
        o[t] = in_box(c, y.box) ? inc : mat;
      }
      return o;
    }
    return three_scale_owner(
        mesh, cfg_.zeta1, cfg_.zeta2,
        [&y](const Vec2& p) { return in_box(p, y.box); },
        [&z](const Vec2& p) { return in_box(p, z.box); },
        &cfg_.materials.at(y.matrix), &cfg_.materials.at(z.inclusion),
        &cfg_.materials.at(z.matrix));
  }

 private:
  static bool in_box(const Vec2& p, const std::array<double, 4>& b) {
    return p[0] > b[0] && p[0] < b[2] && p[1] > b[1] && p[1] < b[3];
  }
  static Vec2 fold(const Vec2& x, double zeta) {
    Vec2 p = x / zeta;
    p[0] -= std::floor(p[0]);
    p[1] -= std::floor(p[1]);
    return p;
  }

  std::vector<FieldSnapshot> run_transient(const TriMesh& mesh,
                                           CoefficientProvider coef) const {
    const double th_bc = cfg_.theta_bc;
    const Vec2 th_grad = cfg_.theta_grad;
    const Vec2 u_bc = cfg_.u_bc;
    const double heat = cfg_.heat;
    const Vec2 force = cfg_.force;
    ThermoMechStepper stepper(
        mesh, std::move(coef), cfg_.solver,
        [th_bc, th_grad](const Vec2& p, double) { return th_bc + th_grad.dot(p); },
        [u_bc](const Vec2&, double) { return u_bc; },
        [heat](const Vec2&, double) { return heat; },
        [force](const Vec2&, double) { return force; });
    const int n = mesh.num_nodes();
    stepper.initialize(Eigen::VectorXd::Constant(n, cfg_.theta_init),
                       Eigen::VectorXd::Zero(2 * n), Eigen::VectorXd::Zero(2 * n));
    const int steps = static_cast<int>(std::round(cfg_.t_end / cfg_.dt));
    std::vector<FieldSnapshot> snaps;
    for (int s = 1; s <= steps; ++s) {
      FieldSnapshot snap = stepper.step();
      if (s % cfg_.output_every == 0 || s == steps) snaps.push_back(std::move(snap));
    }
    return snaps;
  }

  RunConfig cfg_;
};

}  // namespace hots
