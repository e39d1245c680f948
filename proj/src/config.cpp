#include "vfpk/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "vfpk/errors.hpp"
#include "vfpk/kernels.hpp"
#include "vfpk/potentials.hpp"
#include "vfpk/solver.hpp"

namespace vfpk {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
std::string fmt(int v) { return std::to_string(v); }
std::string fmt(long long v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }
std::string fmt(const std::string& v) { return v; }
std::string fmt(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s;
}

void read(const std::string& path, const std::string& s, double& out) {
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0') throw ConfigError(path, "expected a number, got '" + s + "'");
}
template <class I>
void read_integer(const std::string& path, const std::string& s, I& out) {
  const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw ConfigError(path, "expected an integer, got '" + s + "'");
}
void read(const std::string& path, const std::string& s, int& out) { read_integer(path, s, out); }
void read(const std::string& path, const std::string& s, long long& out) { read_integer(path, s, out); }
void read(const std::string& path, const std::string& s, bool& out) {
  if (s == "true" || s == "1" || s == "yes") out = true;
  else if (s == "false" || s == "0" || s == "no") out = false;
  else throw ConfigError(path, "expected a boolean, got '" + s + "'");
}
void read(const std::string&, const std::string& s, std::string& out) { out = s; }
void read(const std::string& path, const std::string& s, std::vector<double>& out) {
  out.clear();
  for (const auto& item : split_list(s)) {
    double v;
    read(path, item, v);
    out.push_back(v);
  }
}

template <class C, class F>
void visit(C& c, F&& f) {
  f("seed", c.seed);
  f("output_dir", c.output_dir);
  f("potential.family", c.potential.family);
  f("potential.alpha", c.potential.alpha);
  f("potential.table", c.potential.table);
  f("kernel.family", c.kernel.family);
  f("kernel.strength", c.kernel.strength);
  f("kernel.alpha", c.kernel.alpha);
  f("kernel.table", c.kernel.table);
  f("grid.dim", c.grid.dim);
  f("grid.half_width", c.grid.half_width);
  f("grid.n_x", c.grid.n_x);
  f("velocity.n_v", c.velocity.n_v);
  f("velocity.nu", c.velocity.nu);
  f("evolve.dt", c.evolve.dt);
  f("evolve.t_end", c.evolve.t_end);
  f("evolve.cfl_guard", c.evolve.cfl_guard);
  f("evolve.filter", c.evolve.filter);
  f("evolve.output_stride", c.evolve.output_stride);
  f("evolve.limiter", c.evolve.limiter);
  f("evolve.boundary", c.evolve.boundary);
  f("steady.tol", c.steady.tol);
  f("steady.max_iter", c.steady.max_iter);
  f("steady.omega", c.steady.omega);
  f("steady.allow_nonpositive", c.steady.allow_nonpositive);
  f("steady.load", c.steady.load);
  f("perturb.mode", c.perturb.mode);
  f("perturb.amplitude", c.perturb.amplitude);
  f("perturb.center", c.perturb.center);
  f("perturb.width", c.perturb.width);
  f("perturb.velocity_shift", c.perturb.velocity_shift);
  f("experiment.hs", c.experiment.hs);
  f("experiment.weighted", c.experiment.weighted);
  f("experiment.fit_from", c.experiment.fit_from);
  f("experiment.fit_to", c.experiment.fit_to);
  f("experiment.e0_eps", c.experiment.e0_eps);
  f("experiment.functionals", c.experiment.functionals);
  f("experiment.trials", c.experiment.trials);
  f("experiment.source", c.experiment.source);
  f("experiment.source_amplitude", c.experiment.source_amplitude);
}

bool known_key(const std::string& path) {
  RunConfig probe;
  bool found = false;
  visit(probe, [&](const char* key, auto&) { found = found || path == key; });
  return found;
}

}  // namespace

void set_config_value(RunConfig& cfg, const std::string& path, const std::string& value) {
  if (path.rfind("sweep.", 0) == 0) {
    const std::string inner = path.substr(6);
    if (!known_key(inner) || inner == "output_dir")
      throw ConfigError(path, "unknown sweep parameter");
    RunConfig scratch;
    const auto values = split_list(value);
    for (const auto& v : values) set_config_value(scratch, inner, v);
    auto it = std::find_if(cfg.sweep.begin(), cfg.sweep.end(), [&](auto& a) { return a.first == inner; });
    if (it == cfg.sweep.end()) cfg.sweep.emplace_back(inner, values);
    else it->second = values;
    return;
  }
  bool found = false;
  visit(cfg, [&](const char* key, auto& field) {
    if (path == key) {
      read(path, value, field);
      found = true;
    }
  });
  if (!found) throw ConfigError(path, "unknown key");
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno), "unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno), "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string path = section.empty() ? key : section + "." + key;
    set_config_value(cfg, path, trim(line.substr(eq + 1)));
  }
  validate_config(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream os;
  std::string section;
  visit(cfg, [&](const char* key, const auto& field) {
    const std::string k = key;
    const auto dot = k.find('.');
    const std::string sec = dot == std::string::npos ? "" : k.substr(0, dot);
    if (sec != section) {
      os << "\n[" << sec << "]\n";
      section = sec;
    }
    os << (dot == std::string::npos ? k : k.substr(dot + 1)) << " = " << fmt(field) << "\n";
  });
  if (!cfg.sweep.empty()) {
    os << "\n[sweep]\n";
    for (const auto& [key, values] : cfg.sweep) {
      os << key << " =";
      for (std::size_t i = 0; i < values.size(); ++i) os << (i ? ", " : " ") << values[i];
      os << "\n";
    }
  }
  return os.str();
}

void validate_config(const RunConfig& cfg) {
  try {
    potential_family_from_string(cfg.potential.family);
  } catch (const Error& e) {
    throw ConfigError("potential.family", e.what());
  }
  try {
    kernel_family_from_string(cfg.kernel.family);
  } catch (const Error& e) {
    throw ConfigError("kernel.family", e.what());
  }
  try {
    limiter_from_string(cfg.evolve.limiter);
  } catch (const Error& e) {
    throw ConfigError("evolve.limiter", e.what());
  }
  if (cfg.evolve.boundary != "Outflow" && cfg.evolve.boundary != "Periodic")
    throw ConfigError("evolve.boundary", "expected Outflow or Periodic");
  if (cfg.grid.dim < 1 || cfg.grid.dim > 3) throw ConfigError("grid.dim", "dimension must be 1, 2 or 3");
  if (cfg.grid.n_x < 2) throw ConfigError("grid.n_x", "need at least two nodes");
  if (!(cfg.grid.half_width > 0)) throw ConfigError("grid.half_width", "must be positive");
  if (cfg.velocity.n_v < 1) throw ConfigError("velocity.n_v", "need at least one mode");
  if (!(cfg.velocity.nu >= 0)) throw ConfigError("velocity.nu", "must be non-negative");
  if (!(cfg.evolve.dt > 0)) throw ConfigError("evolve.dt", "must be positive");
  if (!(cfg.evolve.t_end >= 0)) throw ConfigError("evolve.t_end", "must be non-negative");
  if (cfg.evolve.output_stride < 1) throw ConfigError("evolve.output_stride", "must be >= 1");
  if (cfg.steady.max_iter < 1) throw ConfigError("steady.max_iter", "must be >= 1");
  static const std::vector<std::string> modes{"none", "bump", "rough", "shifted_gaussian"};
  if (std::find(modes.begin(), modes.end(), cfg.perturb.mode) == modes.end())
    throw ConfigError("perturb.mode", "unknown perturbation '" + cfg.perturb.mode + "'");
  if (cfg.experiment.source != "none" && cfg.experiment.source != "manufactured")
    throw ConfigError("experiment.source", "expected none or manufactured");
  if (cfg.experiment.trials < 1) throw ConfigError("experiment.trials", "must be >= 1");
  std::size_t points = 1;
  for (const auto& [key, values] : cfg.sweep) {
    points *= std::max<std::size_t>(values.size(), 1);
    if (points > 10000) throw ConfigError("sweep." + key, "sweep exceeds 10000 points");
  }
}

std::vector<std::vector<std::pair<std::string, std::string>>> sweep_points(
    const RunConfig& cfg, std::vector<std::string>* warnings) {
  std::vector<std::pair<std::string, std::vector<std::string>>> axes;
  for (const auto& [key, values] : cfg.sweep) {
    std::vector<std::string> uniq;
    for (const auto& v : values) {
      // Compare numerically when possible so "0.1" and "1e-1" collide.
      auto same = [&](const std::string& u) {
        char* e1 = nullptr;
        char* e2 = nullptr;
        const double a = std::strtod(u.c_str(), &e1);
        const double b = std::strtod(v.c_str(), &e2);
        if (*e1 == '\0' && *e2 == '\0' && !u.empty() && !v.empty()) return a == b;
        return u == v;
      };
      if (std::any_of(uniq.begin(), uniq.end(), same)) {
        if (warnings) warnings->push_back("duplicate value '" + v + "' for sweep." + key + " ignored");
      } else {
        uniq.push_back(v);
      }
    }
    if (!uniq.empty()) axes.emplace_back(key, uniq);
  }
  std::vector<std::vector<std::pair<std::string, std::string>>> points{{}};
  for (const auto& [key, values] : axes) {
    std::vector<std::vector<std::pair<std::string, std::string>>> next;
    for (const auto& p : points)
      for (const auto& v : values) {
        auto q = p;
        q.emplace_back(key, v);
        next.push_back(std::move(q));
      }
    points = std::move(next);
  }
  return points;
}

}  // namespace vfpk
