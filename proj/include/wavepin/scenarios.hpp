#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wavepin/fbp.hpp"
#include "wavepin/geometry.hpp"
#include "wavepin/grid.hpp"
#include "wavepin/io.hpp"
#include "wavepin/kinetics.hpp"
#include "wavepin/pde2d.hpp"
#include "wavepin/reduced.hpp"

namespace wavepin {

struct KineticsSpec {
  std::string form = "cubic";  // cubic | mori | polynomial
  std::map<std::string, double> params;
};

struct GeometrySpec {
  std::string kind = "circle";  // interval | circle | ellipse | rectangle
  /// interval: {length}; circle: {r}; ellipse: {a, b}; rectangle: {x0, y0, x1, y1}.
  std::vector<double> params{1.0};
  double h = 0.02;  // pde2d cell size

  bool operator==(const GeometrySpec&) const = default;
};

struct InterfaceSpec {
  /// front (1D), disk, ellipse, droplet (pde2d disk centred on the wall),
  /// arc (fbp attached arc built from eps, R0 and R)
  std::string shape = "disk";
  Vec2 center;
  double radius = 0.5;
  double a = 0.5;
  double b = 0.25;
  double s = 0.0;         // droplet / arc: boundary position as a fraction of L
  double position = 0.5;  // front: x of the 1D front
  double R0 = 0.0;
  std::vector<double> R;  // R_2, R_3, ...
  std::size_t nodes = 64;

  bool operator==(const InterfaceSpec&) const = default;
};

struct ReducedSpec {
  std::size_t N = 8;
  double l = 0.0;
  double w_slope = -1.0;
  double R0_star = 0.0;
};

/// fbp half of a cross-validation run. A geometry given here must equal the
/// pde2d one.
struct FbpSide {
  double dt = 0.01;
  std::size_t nodes = 64;
  std::optional<GeometrySpec> geometry;
};

struct RunConfig {
  std::string scenario;
  KineticsSpec kinetics;
  GeometrySpec geometry;
  InterfaceSpec interface;
  ReducedSpec reduced;
  FbpSide fbp;
  double eps = 0.05;
  double D = 1.0;
  std::optional<double> M;       // absent: from the initial fields, or pinned for fbp
  std::optional<double> v_init;  // initial uniform v, absent: v_c
  double t_end = 1.0;
  double dt = 0.0;  // pde2d: <= 0 picks the stable step
  double output_every = 0.1;
  double snapshot_every = 0.0;
  double noise = 0.0;  // amplitude of seeded uniform noise added to u
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  std::vector<double> v_values;  // front-speed
};

const std::vector<std::string>& scenario_names();

/// Strict: unknown keys, wrong types and out-of-range values throw ConfigError.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const fs::path& path);
/// Every field, defaults filled in.
nlohmann::json to_json(const RunConfig& c);

Kinetics make_kinetics(const KineticsSpec& k);
/// Throws ConfigError for the interval kind, which has no 2D boundary.
std::shared_ptr<const DomainBoundary> make_boundary(const GeometrySpec& g);
std::shared_ptr<const GridSpec> make_scenario_grid(const GeometrySpec& g);

/// Signed distance to the initial interface, positive inside Omega_+.
double initial_level(const RunConfig& c, const DomainBoundary* b, Vec2 x);

/// u = tanh front through the initial interface between the branches at
/// v_init, v uniform, seeded noise, then v shifted so the mass equals M when
/// given.
SimState initial_fields(const RunConfig& c, const Kinetics& k, std::shared_ptr<const GridSpec> grid);

/// Marker curve of the initial interface for the fbp scenarios.
InterfaceCurve initial_curve(const RunConfig& c, const DomainBoundary& b, std::size_t nodes);

struct CrossReport {
  std::vector<double> t;
  std::vector<double> area_pde, area_fbp;
  std::vector<double> length_pde, length_fbp;
  std::vector<double> v_mean;
  std::vector<double> v0;  // fbp v0 plus the first-order shift eps <kappa> / c'(v_c)
  double max_area_dev = 0.0;    // relative
  double max_length_dev = 0.0;  // relative
  double max_v_dev = 0.0;       // absolute
  double cprime_vc = 0.0;
  RunResult pde;
  FbpTrajectory fbp;
};

/// Runs pde2d and fbp from the same closed interface and compares them at
/// the pde2d output times (fbp rows interpolated linearly in t). The fbp mass
/// is chosen so both start from the same v once the first-order uniform shift
/// of v is accounted for.
CrossReport cross_validate(const RunConfig& c,
                           const std::function<void(const SimState&)>& on_snapshot = {});
CsvTable cross_table(const CrossReport& r);

struct ScenarioOutput {
  nlohmann::json summary;
  std::vector<std::string> files;  // relative to the output directory
};

/// Runs one scenario and writes its outputs (not the manifest) into dir.
ScenarioOutput run_scenario(const RunConfig& c, const fs::path& dir);

/// run_scenario plus manifest.json; returns the manifest.
Manifest execute(const RunConfig& c, const fs::path& dir);

}  // namespace wavepin
