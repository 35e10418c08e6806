#include "roms/reduced.hpp"

#include "common/binio.hpp"
#include "common/error.hpp"

namespace romlab {

Matrix lift(const Matrix& V, const Matrix& Z) {
  require_dims(V.cols() == Z.rows(), "lift: basis has " + std::to_string(V.cols()) +
                                         " columns, reduced states have " +
                                         std::to_string(Z.rows()) + " rows");
  return V * Z;
}

void save_reduced(const std::string& path, const ReducedTrajectory& traj) {
  io::BinaryWriter w(path, "ROMRED1");
  w.u64(static_cast<std::uint64_t>(traj.Z.rows()));
  w.u64(static_cast<std::uint64_t>(traj.Z.cols()));
  w.u64(traj.mu.size());
  for (double v : traj.mu) w.f64(v);
  w.matrix(traj.Z);
  w.close();
}

ReducedTrajectory load_reduced(const std::string& path) {
  io::BinaryReader r(path, "ROMRED1");
  ReducedTrajectory t;
  const auto rr = static_cast<Index>(r.u64());
  const auto nt = static_cast<Index>(r.u64());
  const auto p = r.u64();
  if (p > 64) throw IoError("ROMRED1: implausible parameter count in '" + path + "'");
  t.mu.resize(p);
  for (auto& v : t.mu) v = r.f64();
  t.Z = r.matrix(rr, nt);
  return t;
}

void export_reduced_csv(const std::string& path, const ReducedTrajectory& traj,
                        const TimeGrid& tg) {
  Matrix table(traj.Z.cols(), traj.Z.rows() + 1);
  for (Index i = 0; i < traj.Z.cols(); ++i) {
    table(i, 0) = tg.time(i);
    table.row(i).tail(traj.Z.rows()) = traj.Z.col(i).transpose();
  }
  std::vector<std::string> header{"t"};
  for (Index k = 0; k < traj.Z.rows(); ++k) header.push_back("z_" + std::to_string(k));
  io::write_csv(path, table, header);
}

}  // namespace romlab
