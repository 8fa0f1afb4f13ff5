#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <sstream>

namespace bwave::cli {

using nlohmann::json;

namespace {

const std::pair<Command, const char*> command_names[] = {
    {Command::validate, "validate"}, {Command::solve, "solve"}, {Command::wave, "wave"},
    {Command::continuation, "continue"}, {Command::tail, "tail"}, {Command::scan, "scan"},
};

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Scalar text -> bool / number / string.
json scalar(const std::string& raw) {
  const std::string v = trim(raw);
  if (v == "true") return true;
  if (v == "false") return false;
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
  try {
    std::size_t used = 0;
    if (v.find_first_of(".eE") == std::string::npos) {
      long long n = std::stoll(v, &used);
      if (used == v.size()) return n;
    }
    double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  return v;
}

json value_of(const std::string& raw) {
  if (raw.find(',') == std::string::npos) return scalar(raw);
  json list = json::array();
  std::stringstream in(raw);
  std::string item;
  while (std::getline(in, item, ',')) list.push_back(scalar(item));
  return list;
}

struct Binding {
  std::string key;
  std::function<void(const json&)> set;
  std::function<json()> get;
};

double as_double(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError("config key '" + key + "' expects a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& key) {
  if (!v.is_number_integer()) throw ConfigError("config key '" + key + "' expects an integer");
  return v.get<int>();
}

bool as_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) throw ConfigError("config key '" + key + "' expects true or false");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& key) {
  if (!v.is_string()) throw ConfigError("config key '" + key + "' expects a string");
  return v.get<std::string>();
}

template <class T, class Conv>
std::vector<T> as_list(const json& v, const std::string& key, Conv conv) {
  std::vector<T> out;
  if (v.is_array()) {
    for (const auto& e : v) out.push_back(conv(e, key));
  } else {
    out.push_back(conv(v, key));
  }
  return out;
}

std::vector<Binding> bindings(ExperimentConfig& c) {
  std::vector<Binding> b;
  auto num = [&b](std::string key, double& ref) {
    b.push_back({key, [&ref, key](const json& v) { ref = as_double(v, key); }, [&ref] { return json(ref); }});
  };
  auto integer = [&b](std::string key, int& ref) {
    b.push_back({key, [&ref, key](const json& v) { ref = as_int(v, key); }, [&ref] { return json(ref); }});
  };
  auto flag = [&b](std::string key, bool& ref) {
    b.push_back({key, [&ref, key](const json& v) { ref = as_bool(v, key); }, [&ref] { return json(ref); }});
  };
  auto text = [&b](std::string key, std::string& ref) {
    b.push_back({key, [&ref, key](const json& v) { ref = as_string(v, key); }, [&ref] { return json(ref); }});
  };

  b.push_back({"command",
               [&c](const json& v) {
                 const std::string name = as_string(v, "command");
                 auto it = std::find_if(std::begin(command_names), std::end(command_names),
                                        [&](const auto& p) { return name == p.second; });
                 if (it == std::end(command_names)) throw ConfigError("config key 'command': unknown command '" + name + "'");
                 c.command = it->first;
               },
               [&c] { return json(to_string(c.command)); }});
  flag("deterministic", c.deterministic);

  text("reaction.family", c.reaction.family);
  num("reaction.alpha", c.reaction.alpha);
  num("reaction.mass", c.reaction.mass);

  num("grid.R", c.grid.R);
  text("grid.H_policy", c.grid.H_policy);
  num("grid.H", c.grid.H);
  integer("grid.nx", c.grid.nx);
  integer("grid.ny", c.grid.ny);
  num("grid.h", c.grid.h);

  num("speed.c_min", c.speed.c_min);
  num("speed.c_max", c.speed.c_max);
  num("speed.speed_tol", c.speed.speed_tol);
  num("speed.width_tol", c.speed.width_tol);
  flag("speed.full_scan", c.speed.full_scan);
  flag("speed.warm_start", c.speed.warm_start);

  num("solver.tol_outer", c.solver.tol_outer);
  integer("solver.max_outer", c.solver.max_outer);
  num("solver.residual_tol", c.solver.residual_tol);
  flag("solver.newton", c.solver.newton);

  num("closed_form.delta", c.closed_form.delta);
  num("closed_form.c", c.closed_form.c);

  num("solve.c", c.solve.c);
  text("solve.start", c.solve.start);

  b.push_back({"continue.schedule",
               [&c](const json& v) { c.cont.schedule = as_list<double>(v, "continue.schedule", as_double); },
               [&c] { return json(c.cont.schedule); }});

  text("tail.field", c.tail.field);
  num("tail.c", c.tail.c);

  num("scan.eta", c.scan.eta);
  num("scan.A", c.scan.A);
  integer("scan.c_samples", c.scan.c_samples);
  integer("scan.u_samples", c.scan.u_samples);
  num("scan.c_lo", c.scan.c_lo);
  num("scan.c_hi", c.scan.c_hi);

  num("validate.R", c.validate.R);
  num("validate.H", c.validate.H);
  b.push_back({"validate.levels",
               [&c](const json& v) { c.validate.levels = as_list<int>(v, "validate.levels", as_int); },
               [&c] { return json(c.validate.levels); }});
  integer("validate.samples", c.validate.samples);

  text("output.dir", c.output.dir);
  text("output.stem", c.output.stem);
  return b;
}

void flatten(const json& j, const std::string& prefix, std::vector<std::pair<std::string, json>>& out) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it->is_object())
      flatten(*it, key, out);
    else
      out.emplace_back(key, *it);
  }
}

}  // namespace

std::string to_string(Command c) {
  for (const auto& [cmd, name] : command_names)
    if (cmd == c) return name;
  return "?";
}

json parse_key_value(const std::string& text) {
  json root = json::object();
  std::stringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (!section.empty()) key = section + "." + key;
    json* node = &root;
    std::stringstream parts(key);
    std::string part;
    std::vector<std::string> path;
    while (std::getline(parts, part, '.')) path.push_back(part);
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
      json& next = (*node)[path[k]];
      if (!next.is_null() && !next.is_object()) throw ConfigError("config key '" + key + "' conflicts with a value");
      node = &next;
    }
    (*node)[path.back()] = value_of(line.substr(eq + 1));
  }
  return root;
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be an object of keys");
  ExperimentConfig c;
  auto table = bindings(c);
  std::vector<std::pair<std::string, json>> items;
  flatten(j, "", items);
  for (const auto& [key, value] : items) {
    auto it = std::find_if(table.begin(), table.end(), [&](const Binding& b) { return b.key == key; });
    if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
    it->set(value);
  }
  return c;
}

ExperimentConfig parse_config(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("malformed JSON config: ") + e.what());
    }
    return config_from_json(j);
  }
  return config_from_json(parse_key_value(text));
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

json to_json(const ExperimentConfig& config) {
  ExperimentConfig copy = config;
  json out = json::object();
  for (const auto& b : bindings(copy)) {
    json* node = &out;
    std::stringstream parts(b.key);
    std::string part;
    std::vector<std::string> path;
    while (std::getline(parts, part, '.')) path.push_back(part);
    for (std::size_t k = 0; k + 1 < path.size(); ++k) node = &(*node)[path[k]];
    (*node)[path.back()] = b.get();
  }
  return out;
}

void check(const ExperimentConfig& c) {
  auto require = [](bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ConfigError("config key '" + key + "' " + what);
  };
  require(c.reaction.family == "bump" || c.reaction.family == "tent", "reaction.family", "must be bump or tent");
  require(c.reaction.alpha > 0.0 && c.reaction.alpha < 1.0, "reaction.alpha", "must lie in (0, 1)");
  require(c.reaction.mass > 0.0, "reaction.mass", "must be positive");
  require(c.grid.R > 0.0, "grid.R", "must be positive");
  require(c.grid.H_policy == "quarter_root" || c.grid.H_policy == "fixed", "grid.H_policy",
          "must be quarter_root or fixed");
  require(c.grid.H_policy != "fixed" || c.grid.H > 0.0, "grid.H", "must be positive when H_policy = fixed");
  require(c.grid.nx >= 16 && c.grid.nx % 2 == 0, "grid.nx", "must be an even integer >= 16");
  require(c.grid.ny == 0 || c.grid.ny >= 8, "grid.ny", "must be 0 (square cells) or >= 8");
  require(c.grid.h > 0.0, "grid.h", "must be positive");
  require(c.speed.c_min > 0.0 && c.speed.c_max > c.speed.c_min, "speed.c_max", "needs 0 < c_min < c_max");
  require(c.speed.speed_tol > 0.0, "speed.speed_tol", "must be positive");
  require(c.speed.width_tol > 0.0, "speed.width_tol", "must be positive");
  require(c.solver.tol_outer > 0.0, "solver.tol_outer", "must be positive");
  require(c.solver.max_outer > 0, "solver.max_outer", "must be positive");
  require(c.solver.residual_tol > 0.0, "solver.residual_tol", "must be positive");
  require(c.closed_form.delta > 0.0, "closed_form.delta", "must be positive");
  require(c.closed_form.c > 0.0, "closed_form.c", "must be positive");
  require(c.solve.c > 0.0, "solve.c", "must be positive");
  require(c.solve.start == "sub" || c.solve.start == "super" || c.solve.start == "both", "solve.start",
          "must be sub, super or both");
  require(!c.cont.schedule.empty(), "continue.schedule", "must not be empty");
  for (std::size_t k = 0; k < c.cont.schedule.size(); ++k)
    require(c.cont.schedule[k] > 0.0 && (k == 0 || c.cont.schedule[k] > c.cont.schedule[k - 1]), "continue.schedule",
            "must be positive and strictly increasing");
  require(c.tail.c >= 0.0, "tail.c", "must be >= 0");
  require(c.command != Command::tail || !c.tail.field.empty(), "tail.field", "is required by the tail command");
  require(c.scan.eta > 0.0, "scan.eta", "must be positive");
  require(c.scan.A > 0.0, "scan.A", "must be positive");
  require(c.scan.c_samples >= 2 && c.scan.u_samples >= 2, "scan.c_samples", "and scan.u_samples must be >= 2");
  require(c.scan.c_lo > 0.0 && c.scan.c_hi > c.scan.c_lo, "scan.c_hi", "needs 0 < c_lo < c_hi");
  require(c.validate.R > 0.0 && c.validate.H > 0.0, "validate.R", "and validate.H must be positive");
  require(c.validate.levels.size() >= 2, "validate.levels", "needs at least two grids");
  for (int n : c.validate.levels) require(n >= 16 && n % 2 == 0, "validate.levels", "entries must be even and >= 16");
  require(c.validate.samples > 0, "validate.samples", "must be positive");
}

}  // namespace bwave::cli
