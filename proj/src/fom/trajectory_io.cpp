#include "fom/trajectory_io.hpp"

#include "common/binio.hpp"

namespace romlab {

void save_trajectory(const std::string& path, const Matrix& states, const Param& mu) {
  io::BinaryWriter w(path, "ROMSNAP1");
  w.u64(static_cast<std::uint64_t>(states.rows()));
  w.u64(static_cast<std::uint64_t>(states.cols()));
  w.u64(mu.size());
  for (double v : mu) w.f64(v);
  w.matrix(states);
  w.close();
}

void save_trajectory(const std::string& path, const SnapshotTrajectory& traj) {
  save_trajectory(path, traj.states, traj.mu);
}

LoadedTrajectory load_trajectory(const std::string& path) {
  io::BinaryReader r(path, "ROMSNAP1");
  const auto n = static_cast<Index>(r.u64());
  const auto nt = static_cast<Index>(r.u64());
  const auto p = r.u64();
  if (p > 64) throw IoError("ROMSNAP1: implausible parameter count in '" + path + "'");
  LoadedTrajectory out;
  out.mu.resize(p);
  for (auto& v : out.mu) v = r.f64();
  out.states = r.matrix(n, nt);
  return out;
}

void export_trajectory_csv(const std::string& path, const Matrix& states, const TimeGrid& tg) {
  Matrix table(states.cols(), states.rows() + 1);
  for (Index i = 0; i < states.cols(); ++i) {
    table(i, 0) = tg.time(i);
    table.row(i).tail(states.rows()) = states.col(i).transpose();
  }
  std::vector<std::string> header{"t"};
  for (Index k = 0; k < states.rows(); ++k) header.push_back("u_" + std::to_string(k));
  io::write_csv(path, table, header);
}

}  // namespace romlab
