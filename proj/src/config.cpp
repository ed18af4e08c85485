#include "vmsns/config.hpp"

#include "vmsns/errors.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace vmsns {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = s.find(',');
    out.push_back(trim(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

struct Reader {
  std::map<std::string, std::pair<std::string, int>> entries;
  std::vector<std::string>& errors;

  const std::string* raw(const std::string& key) const {
    const auto it = entries.find(key);
    return it == entries.end() ? nullptr : &it->second.first;
  }

  std::string where(const std::string& key) const {
    return key + " (line " + std::to_string(entries.at(key).second) + ")";
  }

  void number(const std::string& key, double& out) {
    const std::string* v = raw(key);
    if (!v) return;
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), x);
    if (ec != std::errc() || ptr != v->data() + v->size())
      errors.push_back(where(key) + ": expected a number, got '" + *v + "'");
    else
      out = x;
  }

  void integer(const std::string& key, int& out) {
    const std::string* v = raw(key);
    if (!v) return;
    int x = 0;
    const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), x);
    if (ec != std::errc() || ptr != v->data() + v->size())
      errors.push_back(where(key) + ": expected an integer, got '" + *v + "'");
    else
      out = x;
  }

  void boolean(const std::string& key, bool& out) {
    const std::string* v = raw(key);
    if (!v) return;
    if (*v == "true" || *v == "1" || *v == "yes" || *v == "on")
      out = true;
    else if (*v == "false" || *v == "0" || *v == "no" || *v == "off")
      out = false;
    else
      errors.push_back(where(key) + ": expected true or false, got '" + *v + "'");
  }

  void choice(const std::string& key, std::string& out, std::initializer_list<const char*> allowed) {
    const std::string* v = raw(key);
    if (!v) return;
    for (const char* a : allowed)
      if (*v == a) {
        out = *v;
        return;
      }
    std::string list;
    for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
    errors.push_back(where(key) + ": '" + *v + "' is not one of " + list);
  }
};

}  // namespace

bool ScenarioConfig::wants(std::string_view format) const {
  return std::find(formats.begin(), formats.end(), format) != formats.end();
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "mesh.dim",          "mesh.n",           "mesh.box",        "fe.degree",        "physics.nu",
      "physics.forcing",   "physics.forcing_value", "physics.initial", "physics.amplitude",
      "physics.pressure_scale", "physics.convection", "stab.C_s",   "stab.C_c",         "time.dt",
      "time.T",            "time.snapshot_every", "solver.picard_tol", "solver.picard_max", "solver.linear_tol",
      "output.dir",        "output.formats"};
  return keys;
}

const std::vector<std::string>& required_config_keys() {
  static const std::vector<std::string> keys{"mesh.n", "physics.nu", "time.dt", "time.T"};
  return keys;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

namespace {

std::string suggestion(const std::string& key) {
  std::string best;
  std::size_t best_d = std::string::npos;
  for (const auto& k : config_keys()) {
    std::size_t d = edit_distance(key, k);
    const auto dot = k.find('.');
    d = std::min(d, edit_distance(key, std::string_view(k).substr(dot + 1)));
    if (key.find('.') == std::string::npos) d = std::min(d, edit_distance(key, std::string_view(k).substr(0, dot)) + 1);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

}  // namespace

ScenarioConfig parse_config_text(std::string_view text) {
  std::vector<std::string> errors;
  Reader r{{}, errors};
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view s = line;
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) {
      errors.push_back("line " + std::to_string(lineno) + ": expected 'key = value', got '" + std::string(s) + "'");
      continue;
    }
    const std::string key(trim(s.substr(0, eq)));
    const std::string value(trim(s.substr(eq + 1)));
    if (key.empty()) {
      errors.push_back("line " + std::to_string(lineno) + ": missing key");
      continue;
    }
    if (std::find(config_keys().begin(), config_keys().end(), key) == config_keys().end()) {
      errors.push_back("line " + std::to_string(lineno) + ": unknown key '" + key + "' (did you mean '" +
                       suggestion(key) + "'?)");
      continue;
    }
    if (value.empty()) {
      errors.push_back("line " + std::to_string(lineno) + ": key '" + key + "' has no value");
      continue;
    }
    if (!r.entries.emplace(key, std::make_pair(value, lineno)).second)
      errors.push_back("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
  }
  for (const auto& k : required_config_keys())
    if (!r.raw(k)) errors.push_back("missing required key '" + k + "'");

  ScenarioConfig c;
  r.integer("mesh.dim", c.dim);
  r.integer("mesh.n", c.n);
  r.integer("fe.degree", c.degree);
  r.number("physics.nu", c.nu);
  r.choice("physics.forcing", c.forcing, {"zero", "constant", "manufactured"});
  r.number("physics.forcing_value", c.forcing_value);
  r.choice("physics.initial", c.initial, {"zero", "vortex", "manufactured"});
  r.number("physics.amplitude", c.amplitude);
  r.number("physics.pressure_scale", c.pressure_scale);
  r.boolean("physics.convection", c.convection);
  r.number("stab.C_s", c.C_s);
  r.number("stab.C_c", c.C_c);
  r.number("time.dt", c.dt);
  r.number("time.T", c.T);
  r.integer("time.snapshot_every", c.snapshot_every);
  r.number("solver.picard_tol", c.picard_tol);
  r.integer("solver.picard_max", c.picard_max);
  r.number("solver.linear_tol", c.linear_tol);
  if (const auto* v = r.raw("output.dir")) c.out_dir = *v;
  if (const auto* v = r.raw("output.formats")) {
    c.formats.clear();
    for (auto f : split_list(*v)) {
      if (f == "csv" || f == "vtk")
        c.formats.emplace_back(f);
      else
        errors.push_back(r.where("output.formats") + ": unknown format '" + std::string(f) + "' (csv, vtk)");
    }
  }

  if (c.dim != 2 && c.dim != 3) errors.push_back("mesh.dim must be 2 or 3");
  if (c.n < 1) errors.push_back("mesh.n must be at least 1");
  if (const auto* v = r.raw("mesh.box")) {
    const auto parts = split_list(*v);
    const int want = 2 * ((c.dim == 3) ? 3 : 2);
    if (static_cast<int>(parts.size()) != want) {
      errors.push_back(r.where("mesh.box") + ": expected " + std::to_string(want) + " comma-separated numbers");
    } else {
      for (int d = 0; d < want / 2; ++d) {
        double lo = 0, hi = 0;
        const auto a = std::from_chars(parts[2 * d].data(), parts[2 * d].data() + parts[2 * d].size(), lo);
        const auto b = std::from_chars(parts[2 * d + 1].data(), parts[2 * d + 1].data() + parts[2 * d + 1].size(), hi);
        if (a.ec != std::errc() || b.ec != std::errc() || a.ptr != parts[2 * d].data() + parts[2 * d].size() ||
            b.ptr != parts[2 * d + 1].data() + parts[2 * d + 1].size()) {
          errors.push_back(r.where("mesh.box") + ": bounds must be numbers");
          break;
        }
        if (!(hi > lo)) errors.push_back(r.where("mesh.box") + ": upper bound must exceed lower bound on axis " + std::to_string(d));
        c.box.lower[d] = lo;
        c.box.upper[d] = hi;
      }
    }
  }
  if (c.degree != 1 && c.degree != 2) errors.push_back("fe.degree must be 1 or 2");
  if (!(c.nu > 0.0)) errors.push_back("physics.nu must be positive (got " + std::to_string(c.nu) + ")");
  if (!(c.C_s > 0.0)) errors.push_back("stab.C_s must be positive");
  if (!(c.C_c >= 0.0)) errors.push_back("stab.C_c must be nonnegative");
  if (!(c.dt > 0.0)) errors.push_back("time.dt must be positive");
  if (!(c.T >= 0.0)) errors.push_back("time.T must be nonnegative");
  if (c.snapshot_every < 0) errors.push_back("time.snapshot_every must be nonnegative");
  if (!(c.picard_tol > 0.0 && c.picard_tol < 1.0)) errors.push_back("solver.picard_tol must lie in (0, 1)");
  if (c.picard_max < 1) errors.push_back("solver.picard_max must be at least 1");
  if (!(c.linear_tol > 0.0 && c.linear_tol < 1.0)) errors.push_back("solver.linear_tol must lie in (0, 1)");
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return c;
}

ScenarioConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str());
}

}  // namespace vmsns
