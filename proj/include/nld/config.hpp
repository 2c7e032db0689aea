#ifndef NLD_CONFIG_HPP
#define NLD_CONFIG_HPP

#include "nld/model.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nld {

/// Malformed or invalid configuration; `field` names the offending key when known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::string field = {}) : std::runtime_error(what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Sectioned key = value text:
///
///   # comment
///   [model]
///   variant = first_order
///   deltas = 0.1, 0.05, 0.025
///   [domain]
///   shape = "interval", a = 0, b = 1
///
/// Keys are stored as "section.key"; keys before any header have no prefix.
/// Comma-separated pieces containing '=' are extra pairs; other pieces stay in the list value.
class Config {
 public:
  static Config parse(std::istream& is, const std::string& source = "<config>");
  static Config load(const std::filesystem::path& path);

  std::optional<std::string> get(std::string_view key) const;
  void set(const std::string& key, const std::string& value) { entries_[key] = value; }
  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

/// Fully resolved run parameters, defaults expanded.
struct RunConfig {
  // [domain]; empty shape means "the manufactured case's own domain"
  std::string shape;
  double a = 0.0;
  double b = 1.0;
  double center_x = 0.0;
  double center_y = 0.0;
  double radius = 1.0;
  // [kernel]
  std::string kernel = "poly2";
  // [model]
  PenaltyMode mode = PenaltyMode::FirstOrder;
  std::optional<double> delta;
  std::vector<double> deltas;
  // [resolution]
  std::string resolution = "auto";
  std::optional<double> h;
  // [problem]
  std::string case_name = "sin";
  std::vector<PointSource> point_sources;
  double boundary_value = 0.0;
  // [solver]
  std::string solver = "auto";
  double tol = 1e-10;
  int max_iters = 200000;
  // [output]
  std::string output_dir = "out";
  bool dump_matrix = false;
  // [run]
  std::uint64_t seed = 0;
  int threads = 1;
  bool assert_orders = false;
  int trials = 100;

  /// Domain to use: explicit shape, or the case's.
  Domain domain() const;
  /// Single horizon: model.delta, else the first of model.deltas.
  double single_delta() const;
  /// Cell size under the resolution policy for horizon `delta`.
  double resolve_h(int dimension, double delta) const;
};

/// Validates and resolves; throws ConfigError naming the field.
RunConfig resolve_config(const Config& config);

/// Canonical sectioned form with every field written out; parses back to the same RunConfig.
void write_manifest(const RunConfig& config, std::ostream& os);

}  // namespace nld

#endif
