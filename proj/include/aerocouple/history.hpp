#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace aerocouple {

/// One accepted time level of a simulation.
struct HistoryRecord {
  double time = 0.0;
  Eigen::VectorXd q;
  Eigen::VectorXd qdot;
  Eigen::VectorXd force;  // generalized forces
};

/// One inner coupling iteration.
struct FsiIterationRecord {
  int step = 0;
  int iteration = 0;
  double residual_rms = 0.0;  // m
  double omega = 0.0;
  double seconds = 0.0;
};

/// Header "time,q_1..q_n,qd_1..qd_n,f_1..f_n"; every value printed with %.12e.
std::string format_history(std::span<const HistoryRecord> records, int num_modes);
void write_history(const std::filesystem::path& path, std::span<const HistoryRecord> records, int num_modes);
std::vector<HistoryRecord> parse_history(std::string_view text);
std::vector<HistoryRecord> read_history(const std::filesystem::path& path);

/// "step,iter,residual_rms,omega,seconds"
void write_fsi_log(const std::filesystem::path& path, std::span<const FsiIterationRecord> records);

/// Column-named numeric table, used for aero snapshots and by the analyzer.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column_index(std::string_view name) const;
  std::vector<double> column(std::string_view name) const;
};

CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

}  // namespace aerocouple
