#include "erpf/block_io.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "erpf/errors.hpp"
#include "erpf/matrix_market.hpp"

namespace erpf {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kMetadata = "metadata.json";

CsrMatrix load_block(const fs::path& dir, const char* name) {
  fs::path file = dir / (std::string(name) + ".mtx");
  if (!fs::exists(file)) throw InputError(std::string("block ") + name + ": missing file " + file.string());
  try {
    return read_matrix_market(file);
  } catch (const Error& e) {
    throw InputError(std::string("block ") + name + ": " + e.what());
  }
}

Vector load_rhs(const fs::path& dir, const char* name, Index n) {
  fs::path file = dir / (std::string(name) + ".mtx");
  if (!fs::exists(file)) return Vector(static_cast<std::size_t>(n), 0.0);
  Vector v = read_matrix_market_vector(file);
  if (static_cast<Index>(v.size()) != n)
    throw DimensionError(std::string(name) + ": length " + std::to_string(v.size()) + ", expected " +
                         std::to_string(n));
  return v;
}

double required_number(const json& meta, const char* key) {
  if (!meta.contains(key) || !meta[key].is_number())
    throw InputError(std::string(kMetadata) + ": missing numeric field '" + key + "'");
  return meta[key].get<double>();
}

}  // namespace

void save_block_system(const fs::path& dir, const ThreeFieldSystem& sys, const BlockVector& rhs,
                       std::optional<double> consolidation_time) {
  sys.check_conforming(rhs);
  fs::create_directories(dir);
  write_matrix_market(dir / "K.mtx", sys.K());
  write_matrix_market(dir / "A.mtx", sys.A());
  write_matrix_market(dir / "P.mtx", sys.P());
  write_matrix_market(dir / "Q.mtx", sys.Q());
  write_matrix_market(dir / "B.mtx", sys.B());
  write_matrix_market_vector(dir / "rhs_u.mtx", rhs.u);
  write_matrix_market_vector(dir / "rhs_q.mtx", rhs.q);
  write_matrix_market_vector(dir / "rhs_p.mtx", rhs.p);

  json meta;
  meta["theta"] = sys.theta();
  meta["dt"] = sys.dt();
  meta["gamma"] = sys.gamma();
  meta["dims"] = {{"nu", sys.nu()}, {"nq", sys.nq()}, {"np", sys.np()}};
  if (consolidation_time) meta["t_c"] = *consolidation_time;
  std::ofstream out(dir / kMetadata);
  if (!out) throw InputError("cannot write " + (dir / kMetadata).string());
  out << meta.dump(2) << '\n';
}

LoadedProblem load_block_system(const fs::path& dir) {
  fs::path meta_path = dir / kMetadata;
  std::ifstream in(meta_path);
  if (!in) throw InputError("missing " + meta_path.string());
  json meta;
  try {
    meta = json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(meta_path.string() + ": " + e.what());
  }

  CsrMatrix K = load_block(dir, "K");
  CsrMatrix A = load_block(dir, "A");
  CsrMatrix P = load_block(dir, "P");
  CsrMatrix Q = load_block(dir, "Q");
  CsrMatrix B = load_block(dir, "B");

  double theta = meta.contains("theta") ? required_number(meta, "theta") : 1.0;
  double dt = 0.0;
  if (meta.contains("dt")) {
    dt = required_number(meta, "dt");
  } else {
    dt = required_number(meta, "gamma") / theta;
  }
  if (meta.contains("gamma")) {
    double g = required_number(meta, "gamma");
    if (std::abs(g - theta * dt) > 1e-12 * std::abs(g))
      throw InputError(std::string(kMetadata) + ": gamma disagrees with theta * dt");
  }
  if (meta.contains("dims")) {
    const json& d = meta["dims"];
    auto check = [&](const char* key, Index actual, const char* block) {
      if (d.contains(key) && d[key].get<Index>() != actual)
        throw DimensionError(std::string("block ") + block + ": " + std::to_string(actual) + " rows, metadata says " +
                             std::to_string(d[key].get<Index>()));
    };
    check("nu", K.rows(), "K");
    check("nq", A.rows(), "A");
    check("np", P.rows(), "P");
  }

  ThreeFieldSystem sys(std::move(K), std::move(A), std::move(P), std::move(Q), std::move(B), theta, dt);
  BlockVector rhs{load_rhs(dir, "rhs_u", sys.nu()), load_rhs(dir, "rhs_q", sys.nq()),
                  load_rhs(dir, "rhs_p", sys.np())};
  std::optional<double> tc;
  if (meta.contains("t_c")) tc = required_number(meta, "t_c");
  return {std::move(sys), std::move(rhs), tc};
}

}  // namespace erpf
