#include "rann/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace rann {

namespace {

constexpr const char* kHeader = "rannlab-config v1";

struct SchemaEntry {
  const char* key;
  const char* value;
  const char* comment;
};

// Defaults follow the benchmark setups end to end: ridge strengths, sample
// size rules, frequency stds, domains, time shifts and wave states.
const SchemaEntry kSchema[] = {
    {"run.seed", "42", "master seed; every sampler derives its own stream"},
    {"run.threads", "1", "worker threads for independent sweep cells"},
    {"run.verbosity", "1", "0 = quiet, 1 = progress lines"},

    {"sweep.repeats", "5", "independent refits per width"},
    {"sweep.eval_points", "20000", "held-out points for the relative L2 error"},

    {"ridge.jitter", "0", "diagonal boost on factorization failure; 0 = automatic"},

    {"pme.d", "1", "spatial dimension"},
    {"pme.m", "2", "porous-medium exponent"},
    {"pme.b_const", "1", "free constant of the self-similar profile"},
    {"pme.t0", "0.1", "time shift; initial data is the profile at t0 (use 0.01 for d >= 4)"},
    {"pme.t_horizon", "1", "training window is (t0, t0 + t_horizon)"},
    {"pme.widths", "25,50,100,200,400", "network widths for the sweep"},
    {"pme.m_factor", "10", "sample-size rule M = m_factor * N"},
    {"pme.freq_std", "10", "Fourier-feature frequency std"},
    {"pme.lambda", "1e-5", "ridge strength"},

    {"cns.mu", "1", "viscosity"},
    {"cns.eps", "1e-3", "pressure strength"},
    {"cns.gamma", "2", "pressure exponent"},
    {"cns.v_plus", "1.5", "downstream specific volume"},
    {"cns.v_minus", "1.1", "upstream specific volume (second closure datum)"},
    {"cns.xi_min", "-5", "wave grid lower end"},
    {"cns.xi_max", "5", "wave grid upper end"},
    {"cns.grid_points", "5000", "wave ODE grid size"},
    {"cns.t_horizon", "1", "time horizon of the space-time domain"},
    {"cns.velocity_mode", "mass_conservation",
     "velocity closure: mass_conservation or paper_relation"},
    {"cns.widths", "10,25,50,100,250", "network widths for the sweep"},
    {"cns.m_factor", "2000", "sample-size rule M = m_factor * N"},
    {"cns.freq_std", "3.5", "Fourier-feature frequency std"},
    {"cns.lambda", "1e-3", "ridge strength"},

    {"sampler.lambda_tau", "1", "heavy-tail exponent of the time frequency"},
    {"sampler.lambda_a", "1", "heavy-tail exponent of the spatial frequency"},

    {"ridgelet.activation", "tanh", "activation paired with psi (tanh, cos, sigmoid)"},
    {"ridgelet.p", "0", "time-regularity weight in the diagnostics"},
    {"ridgelet.q", "0", "space-regularity weight in the diagnostics"},
    {"ridgelet.tau_a_max", "8", "frequency grid bound for (tau, a)"},
    {"ridgelet.tau_a_step", "0.125", "frequency grid step for (tau, a)"},
    {"ridgelet.b_max", "12", "offset grid bound"},
    {"ridgelet.b_step", "0.0625", "offset grid step"},
    {"ridgelet.gl_nodes", "96", "Gauss-Legendre nodes per box axis"},
    {"ridgelet.box", "1", "support box half-width for the check batteries"},
    {"ridgelet.bump_width", "0.2", "Gaussian bump width of the test function"},
    {"ridgelet.seeds", "2000", "Monte Carlo repetitions for the estimator battery"},
    {"ridgelet.estimator_width", "64", "network width N of the estimator battery"},
};

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

Config Config::defaults() {
  Config cfg;
  for (const SchemaEntry& e : kSchema) {
    cfg.order_.push_back(e.key);
    cfg.entries_[e.key] = Entry{e.value, e.comment};
  }
  return cfg;
}

Config Config::from_text(const std::string& text, const std::string& origin) {
  Config cfg = defaults();
  std::istringstream is(text);
  std::string line;
  std::string section;
  std::vector<std::string> errors;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(is, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kHeader)
        errors.push_back(origin + ":" + std::to_string(line_no) +
                         ": expected header '" + kHeader + "'");
      header_seen = true;
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') {
        errors.push_back(origin + ":" + std::to_string(line_no) +
                         ": malformed section line");
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back(origin + ":" + std::to_string(line_no) +
                       ": expected 'key = value'");
      continue;
    }
    const std::string key = section.empty() ? trim(line.substr(0, eq))
                                            : section + "." + trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    auto it = cfg.entries_.find(key);
    if (it == cfg.entries_.end()) {
      errors.push_back(origin + ":" + std::to_string(line_no) +
                       ": unknown key '" + key + "'");
      continue;
    }
    it->second.value = value;
  }
  if (!header_seen)
    errors.push_back(origin + ": empty config (missing header '" +
                     std::string(kHeader) + "')");
  if (!errors.empty()) {
    std::string what = "config errors:";
    for (const std::string& e : errors) what += "\n  " + e;
    throw ConfigError(what);
  }
  return cfg;
}

Config Config::from_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config file not found: " + path);
  std::stringstream buffer;
  buffer << is.rdbuf();
  return from_text(buffer.str(), path);
}

void Config::apply_override(const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError("override must be section.key=value: " + assignment);
  const std::string key = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("override of unknown key '" + key + "'");
  it->second.value = value;
}

bool Config::has(const std::string& key) const { return entries_.count(key) > 0; }

const std::string& Config::get_raw(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second.value;
}

double Config::get_double(const std::string& key) const {
  const std::string& raw = get_raw(key);
  try {
    std::size_t used = 0;
    const double v = std::stod(raw, &used);
    if (used != raw.size()) throw std::invalid_argument(raw);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': not a number: '" + raw + "'");
  }
}

int Config::get_int(const std::string& key) const {
  const std::string& raw = get_raw(key);
  try {
    std::size_t used = 0;
    const long v = std::stol(raw, &used);
    if (used != raw.size()) throw std::invalid_argument(raw);
    return static_cast<int>(v);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': not an integer: '" + raw + "'");
  }
}

std::uint64_t Config::get_u64(const std::string& key) const {
  const std::string& raw = get_raw(key);
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(raw, &used);
    if (used != raw.size()) throw std::invalid_argument(raw);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': not an unsigned integer: '" + raw + "'");
  }
}

std::string Config::get_string(const std::string& key) const { return get_raw(key); }

std::vector<int> Config::get_int_list(const std::string& key) const {
  const std::string& raw = get_raw(key);
  std::vector<int> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(static_cast<int>(std::stol(item, &used)));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("key '" + key + "': not an integer list: '" + raw + "'");
    }
  }
  if (out.empty()) throw ConfigError("key '" + key + "': empty list");
  return out;
}

void Config::set(const std::string& key, const std::string& value) {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second.value = value;
}

std::string Config::render() const {
  std::ostringstream os;
  os << kHeader << "\n";
  std::string section;
  for (const std::string& key : order_) {
    const std::size_t dot = key.find('.');
    const std::string sec = key.substr(0, dot);
    if (sec != section) {
      os << "\n[" << sec << "]\n";
      section = sec;
    }
    const Entry& e = entries_.at(key);
    os << key.substr(dot + 1) << " = " << e.value;
    if (!e.comment.empty()) os << "  # " << e.comment;
    os << "\n";
  }
  return os.str();
}

}  // namespace rann
