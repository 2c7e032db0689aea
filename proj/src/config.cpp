#include "nld/config.hpp"

#include "nld/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace nld {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
    return s.substr(1, s.size() - 2);
  return s;
}

// Splits on commas outside quotes.
std::vector<std::string> split_top(std::string_view s) {
  std::vector<std::string> parts;
  std::string cur;
  char quote = 0;
  for (char c : s) {
    if (quote) {
      if (c == quote) quote = 0;
      cur += c;
    } else if (c == '"' || c == '\'') {
      quote = c;
      cur += c;
    } else if (c == ',') {
      parts.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(trim(cur));
  return parts;
}

std::string strip_comment(std::string_view line) {
  char quote = 0;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char c = line[k];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '#') {
      return std::string(line.substr(0, k));
    }
  }
  return std::string(line);
}

double parse_double(const std::string& text, const std::string& field) {
  double value = 0.0;
  const std::string t = trim(text);
  const auto* begin = t.data();
  const auto* end = t.data() + t.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || t.empty()) throw ConfigError(field + ": '" + t + "' is not a number", field);
  return value;
}

long long parse_integer(const std::string& text, const std::string& field) {
  long long value = 0;
  const std::string t = trim(text);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw ConfigError(field + ": '" + t + "' is not an integer", field);
  return value;
}

bool parse_bool(const std::string& text, const std::string& field) {
  std::string t = trim(text);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "true" || t == "yes" || t == "1" || t == "on") return true;
  if (t == "false" || t == "no" || t == "0" || t == "off") return false;
  throw ConfigError(field + ": '" + t + "' is not a boolean", field);
}

std::vector<double> parse_list(const std::string& text, const std::string& field) {
  std::vector<double> out;
  for (const auto& piece : split_top(text)) {
    if (piece.empty()) continue;
    out.push_back(parse_double(piece, field));
  }
  return out;
}

// Canonical key -> accepted bare aliases.
const std::vector<std::pair<std::string, std::vector<std::string>>>& known_keys() {
  static const std::vector<std::pair<std::string, std::vector<std::string>>> keys = {
      {"domain.shape", {"domain", "shape"}},
      {"domain.a", {"a"}},
      {"domain.b", {"b"}},
      {"domain.center_x", {"center_x"}},
      {"domain.center_y", {"center_y"}},
      {"domain.radius", {"radius"}},
      {"kernel.name", {"kernel"}},
      {"model.variant", {"model", "variant"}},
      {"model.delta", {"delta"}},
      {"model.deltas", {"deltas"}},
      {"resolution.policy", {"resolution"}},
      {"resolution.h", {"h"}},
      {"problem.case", {"case"}},
      {"problem.point_sources", {"point_sources"}},
      {"problem.boundary_value", {"boundary_value"}},
      {"solver.method", {"solver"}},
      {"solver.tol", {"tol"}},
      {"solver.max_iters", {"max_iters"}},
      {"output.dir", {"output_dir"}},
      {"output.dump_matrix", {"dump_matrix"}},
      {"run.seed", {"seed"}},
      {"run.threads", {"threads"}},
      {"run.assert_orders", {"assert_orders"}},
      {"run.trials", {"trials"}},
  };
  return keys;
}

}  // namespace

Config Config::parse(std::istream& is, const std::string& source) {
  Config cfg;
  std::string section;
  std::string raw;
  int line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    std::string key = trim(std::string_view(line).substr(0, eq));
    if (key.empty()) throw ConfigError(where + ": empty key");
    std::vector<std::string> list;
    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& piece : split_top(std::string_view(line).substr(eq + 1))) {
      const auto inner = piece.find('=');
      if (inner != std::string::npos && piece.front() != '"' && piece.front() != '\'') {
        pairs.emplace_back(trim(std::string_view(piece).substr(0, inner)),
                           unquote(trim(std::string_view(piece).substr(inner + 1))));
      } else if (pairs.empty()) {
        list.push_back(unquote(piece));
      } else {
        throw ConfigError(where + ": list value after an inline key = value pair");
      }
    }
    std::string value;
    for (std::size_t k = 0; k < list.size(); ++k) value += (k ? ", " : "") + list[k];
    const std::string prefix = section.empty() ? "" : section + ".";
    cfg.entries_[prefix + key] = value;
    for (const auto& [k, v] : pairs) cfg.entries_[prefix + k] = v;
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file '" + path.string() + "'", "--config");
  return parse(is, path.string());
}

std::optional<std::string> Config::get(std::string_view key) const {
  const auto it = entries_.find(std::string(key));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

namespace {

// Looks up a canonical key, falling back to its bare aliases.
std::optional<std::string> lookup(const Config& cfg, const std::string& canonical) {
  if (auto v = cfg.get(canonical)) return v;
  for (const auto& [key, aliases] : known_keys()) {
    if (key != canonical) continue;
    for (const auto& alias : aliases)
      if (auto v = cfg.get(alias)) return v;
  }
  return std::nullopt;
}

PointSource parse_point_source(const std::string& text, const std::string& field) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(parse_double(item, field));
  if (parts.size() == 2) return {Point(parts[0], 0.0), parts[1]};
  if (parts.size() == 3) return {Point(parts[0], parts[1]), parts[2]};
  throw ConfigError(field + ": point source '" + text + "' must be x:charge or x:y:charge", field);
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

RunConfig resolve_config(const Config& config) {
  std::set<std::string> accepted;
  for (const auto& [key, aliases] : known_keys()) {
    accepted.insert(key);
    accepted.insert(aliases.begin(), aliases.end());
  }
  for (const auto& [key, value] : config.entries())
    if (!accepted.contains(key)) throw ConfigError("unknown configuration key '" + key + "'", key);

  RunConfig rc;
  auto text = [&](const char* key) { return lookup(config, key); };
  auto number = [&](const char* key, double& target) {
    if (auto v = text(key)) target = parse_double(*v, key);
  };

  if (auto v = text("domain.shape")) rc.shape = *v;
  if (!rc.shape.empty() && rc.shape != "interval" && rc.shape != "disk")
    throw ConfigError("domain.shape must be 'interval' or 'disk' (got '" + rc.shape + "')", "domain.shape");
  number("domain.a", rc.a);
  number("domain.b", rc.b);
  number("domain.center_x", rc.center_x);
  number("domain.center_y", rc.center_y);
  number("domain.radius", rc.radius);
  if (rc.shape == "interval" && !(rc.a < rc.b)) throw ConfigError("domain: need a < b", "domain.a");
  if (rc.shape == "disk" && !(rc.radius > 0.0)) throw ConfigError("domain.radius must be positive", "domain.radius");

  if (auto v = text("kernel.name")) rc.kernel = *v;
  try {
    (void)profile_by_name(rc.kernel);
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("kernel.name: ") + e.what(), "kernel.name");
  }

  if (auto v = text("model.variant")) {
    try {
      rc.mode = parse_penalty_mode(*v);
    } catch (const ParameterError& e) {
      throw ConfigError(std::string("model.variant: ") + e.what(), "model.variant");
    }
  }
  if (auto v = text("model.delta")) {
    rc.delta = parse_double(*v, "model.delta");
    if (!(*rc.delta > 0.0)) throw ConfigError("model.delta must be positive (got " + *v + ")", "model.delta");
  }
  if (auto v = text("model.deltas")) {
    rc.deltas = parse_list(*v, "model.deltas");
    for (double d : rc.deltas)
      if (!(d > 0.0)) throw ConfigError("model.deltas entries must be positive", "model.deltas");
  }

  if (auto v = text("resolution.policy")) rc.resolution = *v;
  if (auto v = text("resolution.h")) {
    rc.h = parse_double(*v, "resolution.h");
    if (!(*rc.h > 0.0)) throw ConfigError("resolution.h must be positive", "resolution.h");
    if (!text("resolution.policy")) rc.resolution = "explicit";
  }
  if (rc.resolution != "auto" && rc.resolution != "explicit")
    throw ConfigError("resolution.policy must be 'auto' or 'explicit'", "resolution.policy");
  if (rc.resolution == "explicit" && !rc.h)
    throw ConfigError("resolution.policy = explicit needs resolution.h", "resolution.h");
  if (rc.resolution == "auto") rc.h.reset();

  if (auto v = text("problem.point_sources")) {
    for (const auto& piece : split_top(*v))
      if (!piece.empty()) rc.point_sources.push_back(parse_point_source(piece, "problem.point_sources"));
  }
  number("problem.boundary_value", rc.boundary_value);
  if (auto v = text("problem.case")) rc.case_name = *v;
  if (rc.point_sources.empty()) {
    const auto names = case_names();
    if (std::find(names.begin(), names.end(), rc.case_name) == names.end())
      throw ConfigError("problem.case: unknown case '" + rc.case_name + "'", "problem.case");
  } else {
    rc.case_name = "point_sources";
  }

  if (auto v = text("solver.method")) rc.solver = *v;
  if (rc.solver != "auto" && rc.solver != "cg" && rc.solver != "jacobi" && rc.solver != "bicgstab")
    throw ConfigError("solver.method must be auto, cg, bicgstab or jacobi", "solver.method");
  number("solver.tol", rc.tol);
  if (!(rc.tol > 0.0)) throw ConfigError("solver.tol must be positive", "solver.tol");
  if (auto v = text("solver.max_iters")) rc.max_iters = static_cast<int>(parse_integer(*v, "solver.max_iters"));
  if (rc.max_iters <= 0) throw ConfigError("solver.max_iters must be positive", "solver.max_iters");

  if (auto v = text("output.dir")) rc.output_dir = *v;
  if (auto v = text("output.dump_matrix")) rc.dump_matrix = parse_bool(*v, "output.dump_matrix");

  if (auto v = text("run.seed")) {
    const long long s = parse_integer(*v, "run.seed");
    if (s < 0) throw ConfigError("run.seed must be nonnegative", "run.seed");
    rc.seed = static_cast<std::uint64_t>(s);
  }
  if (auto v = text("run.threads")) rc.threads = static_cast<int>(parse_integer(*v, "run.threads"));
  if (rc.threads < 1) throw ConfigError("run.threads must be >= 1", "run.threads");
  if (auto v = text("run.assert_orders")) rc.assert_orders = parse_bool(*v, "run.assert_orders");
  if (auto v = text("run.trials")) rc.trials = static_cast<int>(parse_integer(*v, "run.trials"));
  if (rc.trials < 0) throw ConfigError("run.trials must be >= 0", "run.trials");

  // Pin the domain so the manifest is self-contained.
  if (rc.shape.empty()) {
    const Domain d = rc.point_sources.empty() ? manufactured_case(rc.case_name).domain : Domain::interval(rc.a, rc.b);
    if (const auto* iv = std::get_if<Interval>(&d.shape())) {
      rc.shape = "interval";
      rc.a = iv->a;
      rc.b = iv->b;
    } else {
      const auto& disk = std::get<Disk>(d.shape());
      rc.shape = "disk";
      rc.center_x = disk.center.x();
      rc.center_y = disk.center.y();
      rc.radius = disk.radius;
    }
  }
  return rc;
}

Domain RunConfig::domain() const {
  if (shape == "disk") return Domain::disk(Point(center_x, center_y), radius);
  if (shape == "interval") return Domain::interval(a, b);
  if (point_sources.empty()) return manufactured_case(case_name).domain;
  return Domain::interval(a, b);
}

double RunConfig::single_delta() const {
  if (delta) return *delta;
  if (!deltas.empty()) return deltas.front();
  throw ConfigError("model.delta is required", "model.delta");
}

double RunConfig::resolve_h(int dimension, double d) const {
  if (resolution == "explicit" && h) return *h;
  return max_resolution(dimension, d);
}

void write_manifest(const RunConfig& rc, std::ostream& os) {
  auto num = [](double v) { return format_double(v); };
  os << "# fully resolved run configuration\n";
  os << "[domain]\nshape = " << rc.shape << "\n";
  if (rc.shape == "disk")
    os << "center_x = " << num(rc.center_x) << "\ncenter_y = " << num(rc.center_y) << "\nradius = " << num(rc.radius)
       << "\n";
  else
    os << "a = " << num(rc.a) << "\nb = " << num(rc.b) << "\n";
  os << "\n[kernel]\nname = " << rc.kernel << "\n";
  os << "\n[model]\nvariant = " << to_string(rc.mode) << "\n";
  if (rc.delta) os << "delta = " << num(*rc.delta) << "\n";
  if (!rc.deltas.empty()) {
    os << "deltas = ";
    for (std::size_t k = 0; k < rc.deltas.size(); ++k) os << (k ? ", " : "") << num(rc.deltas[k]);
    os << "\n";
  }
  os << "\n[resolution]\npolicy = " << rc.resolution << "\n";
  if (rc.h) os << "h = " << num(*rc.h) << "\n";
  os << "\n[problem]\n";
  if (rc.point_sources.empty()) {
    os << "case = " << rc.case_name << "\n";
  } else {
    os << "point_sources = ";
    for (std::size_t k = 0; k < rc.point_sources.size(); ++k) {
      const auto& s = rc.point_sources[k];
      os << (k ? ", " : "") << num(s.location.x()) << ':';
      if (rc.shape == "disk") os << num(s.location.y()) << ':';
      os << num(s.charge);
    }
    os << "\nboundary_value = " << num(rc.boundary_value) << "\n";
  }
  os << "\n[solver]\nmethod = " << rc.solver << "\ntol = " << num(rc.tol) << "\nmax_iters = " << rc.max_iters
     << "\n";
  os << "\n[output]\ndir = " << rc.output_dir << "\ndump_matrix = " << (rc.dump_matrix ? "true" : "false") << "\n";
  os << "\n[run]\nseed = " << rc.seed << "\nthreads = " << rc.threads
     << "\nassert_orders = " << (rc.assert_orders ? "true" : "false") << "\ntrials = " << rc.trials << "\n";
}

}  // namespace nld
