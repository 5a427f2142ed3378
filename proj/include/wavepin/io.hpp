#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "wavepin/fbp.hpp"
#include "wavepin/geometry.hpp"
#include "wavepin/pde2d.hpp"
#include "wavepin/reduced.hpp"

namespace wavepin {

namespace fs = std::filesystem;

/// Numeric table with a header row. Lines starting with '#' before the
/// header carry metadata as "key=value".
struct CsvTable {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Throws FormatError naming the column if it is absent.
  std::size_t index(const std::string& name) const;
  std::vector<double> column(const std::string& name) const;
  /// Metadata value, FormatError if absent.
  const std::string& get_meta(const std::string& key) const;
};

/// Values printed with 17 significant digits, so a write/read round trip is exact.
void write_csv(const fs::path& path, const CsvTable& t);
/// FormatError on ragged rows, non-numeric fields or a missing header.
CsvTable read_csv(const fs::path& path);

/// Curve CSV: metadata topology / s_start / s_end, then x,y rows.
CsvTable curve_table(const InterfaceCurve& c);
InterfaceCurve curve_from_table(const CsvTable& t);
void write_curve_csv(const fs::path& path, const InterfaceCurve& c);
InterfaceCurve read_curve_csv(const fs::path& path);

/// Time series tables for each level of the model.
CsvTable diagnostics_table(const std::vector<Diagnostics>& series);
CsvTable fbp_table(const std::vector<FbpRow>& rows);
CsvTable reduced_table(const std::vector<ReducedState>& samples);

/// "WPF1" snapshot: magic, u32 nx, u32 ny, f64 h, f64 t, nx*ny f64 u row-major,
/// nx*ny f64 v; all little endian, masked-out cells NaN.
struct Snapshot {
  std::uint32_t nx = 0;
  std::uint32_t ny = 0;
  double h = 0.0;
  double t = 0.0;
  std::vector<double> u;
  std::vector<double> v;
};

Snapshot snapshot_of(const SimState& s);
void write_snapshot(const fs::path& path, const Snapshot& snap);
void write_snapshot(const fs::path& path, const SimState& s);
/// FormatError on a bad magic, a short file or trailing bytes.
Snapshot read_snapshot(const fs::path& path);

nlohmann::json equilibria_json(const std::vector<Equilibrium>& eq);
void write_json(const fs::path& path, const nlohmann::json& j);
/// FormatError when the file is missing or not JSON.
nlohmann::json read_json(const fs::path& path);

/// Library and toolchain versions recorded in every manifest.
nlohmann::json version_info();

struct Manifest {
  std::string scenario;
  nlohmann::json config;   // fully resolved
  nlohmann::json summary;  // scenario results
  std::vector<std::string> files;  // relative to the manifest's directory
  double wall_time_s = 0.0;
};

void write_manifest(const fs::path& path, const Manifest& m);
/// Also checks that every listed file exists (FormatError otherwise).
Manifest read_manifest(const fs::path& path);

}  // namespace wavepin
