#pragma once

#include "vmsns/spectral_lab.hpp"
#include "vmsns/state.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace vmsns {

inline constexpr const char* kLedgerHeader = "t,ke_fe,ke_sub,visc_diss,sub_diss,power_in,jump_terms,imbalance";
inline constexpr const char* kReportHeader = "lemma,s,level,h,value,ratio_min,ratio_max";

/// Shortest decimal text that reads back to the same double.
std::string format_double(double x);
double parse_double(std::string_view text);

void write_ledger(const std::filesystem::path& path, const std::vector<EnergyRecord>& ledger);
/// Checks the header and field count; throws IoError / InvariantError.
std::vector<EnergyRecord> read_ledger(const std::filesystem::path& path);

struct LedgerCheck {
  std::vector<std::string> violations;
  double worst_relative = 0.0;
  bool ok() const { return violations.empty(); }
};

/// Re-verifies a ledger: increasing t, nonnegative energy/dissipation columns,
/// stored and recomputed imbalance within `tol` relative. The first row is
/// taken to follow t = 0 and is checked on its stored imbalance only.
LedgerCheck check_ledger(const std::vector<EnergyRecord>& ledger, double tol = 1e-10);

/// VTK legacy ASCII unstructured grid: mesh vertices, velocity and pressure
/// at vertices, cell-averaged subscale magnitude.
void write_fields(const std::filesystem::path& path, const Discretization& disc, const StarState& state);

struct VtkData {
  std::vector<Point> points;
  std::vector<std::vector<int>> cells;
  std::vector<int> cell_types;
  std::vector<Vec3> velocity;
  std::vector<double> pressure;
  std::vector<double> subscale;
};

VtkData read_fields(const std::filesystem::path& path);

/// Quadrature-averaged |u~| per cell.
std::vector<double> cell_subscale_magnitude(const Discretization& disc, const SubscaleField& tilde);

void write_report(const std::filesystem::path& path, const EquivalenceReport& report);

/// Minimal CSV table writer: header plus rows of already formatted cells.
void write_table(const std::filesystem::path& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows);

}  // namespace vmsns
