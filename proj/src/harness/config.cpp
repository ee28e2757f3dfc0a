#include "ridgesketch/harness/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include "ridgesketch/errors.hpp"

namespace ridgesketch::harness {

namespace {

constexpr ExperimentKind kAllKinds[] = {
    ExperimentKind::ridge_risk,    ExperimentKind::bias_variance, ExperimentKind::representation,
    ExperimentKind::primal_orth,   ExperimentKind::dual_orth,     ExperimentKind::full,
    ExperimentKind::marginal,      ExperimentKind::dual_gaussian, ExperimentKind::primal_gaussian,
    ExperimentKind::cv,            ExperimentKind::loo,           ExperimentKind::timing,
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

// Shortest representation that parses back to the same double.
std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view key, std::string_view text) {
  text = trim(text);
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw ValidationError("config key '" + std::string(key) + "': '" + std::string(text) +
                          "' is not a finite number");
  }
  return v;
}

template <class Int>
Int parse_int(std::string_view key, std::string_view text) {
  text = trim(text);
  Int v{};
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ValidationError("config key '" + std::string(key) + "': '" + std::string(text) +
                          "' is not an integer");
  }
  return v;
}

bool parse_bool(std::string_view key, std::string_view text) {
  text = trim(text);
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ValidationError("config key '" + std::string(key) + "': '" + std::string(text) +
                        "' is not a boolean");
}

std::vector<std::string_view> split_list(std::string_view text) {
  std::vector<std::string_view> parts;
  text = trim(text);
  if (text.empty()) return parts;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    parts.push_back(trim(text.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return parts;
}

std::vector<double> parse_doubles(std::string_view key, std::string_view text) {
  std::vector<double> out;
  for (auto part : split_list(text)) out.push_back(parse_double(key, part));
  return out;
}

std::string join_doubles(const std::vector<double>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += ',';
    s += format_double(values[i]);
  }
  return s;
}

struct Field {
  std::string_view name;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, std::string_view)> set;
  bool affects_results = true;
};

const std::vector<Field>& fields() {
  using C = ExperimentConfig;
  static const std::vector<Field> table = {
      {"kind", [](const C& c) { return std::string(to_string(c.kind)); },
       [](C& c, std::string_view v) { c.kind = parse_experiment_kind(trim(v)); }},
      {"n", [](const C& c) { return std::to_string(c.n); },
       [](C& c, std::string_view v) { c.n = parse_int<std::int64_t>("n", v); }},
      {"gamma", [](const C& c) { return join_doubles(c.gammas); },
       [](C& c, std::string_view v) { c.gammas = parse_doubles("gamma", v); }},
      {"lam", [](const C& c) { return join_doubles(c.lams); },
       [](C& c, std::string_view v) { c.lams = parse_doubles("lam", v); }},
      {"ratio", [](const C& c) { return join_doubles(c.ratios); },
       [](C& c, std::string_view v) { c.ratios = parse_doubles("ratio", v); }},
      {"alpha", [](const C& c) { return format_double(c.alpha); },
       [](C& c, std::string_view v) { c.alpha = parse_double("alpha", v); }},
      {"sigma", [](const C& c) { return format_double(c.sigma); },
       [](C& c, std::string_view v) { c.sigma = parse_double("sigma", v); }},
      {"family", [](const C& c) { return std::string(to_string(c.family)); },
       [](C& c, std::string_view v) { c.family = parse_sketch_family(trim(v)); }},
      {"sketches",
       [](const C& c) {
         std::string s;
         for (std::size_t i = 0; i < c.sketches.size(); ++i) {
           if (i) s += ',';
           s += to_string(c.sketches[i]);
         }
         return s;
       },
       [](C& c, std::string_view v) {
         c.sketches.clear();
         for (auto part : split_list(v)) c.sketches.push_back(parse_sketch_kind(part));
       }},
      {"replicates", [](const C& c) { return std::to_string(c.replicates); },
       [](C& c, std::string_view v) { c.replicates = parse_int<int>("replicates", v); }},
      {"seed", [](const C& c) { return std::to_string(c.seed); },
       [](C& c, std::string_view v) { c.seed = parse_int<std::uint64_t>("seed", v); }},
      {"threads", [](const C& c) { return std::to_string(c.threads); },
       [](C& c, std::string_view v) { c.threads = parse_int<int>("threads", v); }, false},
      {"out", [](const C& c) { return c.out; },
       [](C& c, std::string_view v) { c.out = std::string(trim(v)); }, false},
      {"format", [](const C& c) { return c.format; },
       [](C& c, std::string_view v) { c.format = std::string(trim(v)); }, false},
      {"folds", [](const C& c) { return std::to_string(c.folds); },
       [](C& c, std::string_view v) { c.folds = parse_int<int>("folds", v); }},
      {"lam_grid", [](const C& c) { return join_doubles(c.lam_grid); },
       [](C& c, std::string_view v) { c.lam_grid = parse_doubles("lam_grid", v); }},
      {"grid_points", [](const C& c) { return std::to_string(c.grid_points); },
       [](C& c, std::string_view v) { c.grid_points = parse_int<int>("grid_points", v); }},
      {"test_fraction", [](const C& c) { return format_double(c.test_fraction); },
       [](C& c, std::string_view v) { c.test_fraction = parse_double("test_fraction", v); }},
      {"data", [](const C& c) { return c.data; },
       [](C& c, std::string_view v) { c.data = std::string(trim(v)); }},
      {"response", [](const C& c) { return c.response; },
       [](C& c, std::string_view v) { c.response = std::string(trim(v)); }},
      {"standardize", [](const C& c) { return std::string(c.standardize ? "true" : "false"); },
       [](C& c, std::string_view v) { c.standardize = parse_bool("standardize", v); }},
      {"proxy_n", [](const C& c) { return std::to_string(c.proxy_n); },
       [](C& c, std::string_view v) { c.proxy_n = parse_int<int>("proxy_n", v); }},
      {"proxy_reps", [](const C& c) { return std::to_string(c.proxy_reps); },
       [](C& c, std::string_view v) { c.proxy_reps = parse_int<int>("proxy_reps", v); }},
      {"probes", [](const C& c) { return std::to_string(c.probes); },
       [](C& c, std::string_view v) { c.probes = parse_int<int>("probes", v); }},
      {"repeats", [](const C& c) { return std::to_string(c.repeats); },
       [](C& c, std::string_view v) { c.repeats = parse_int<int>("repeats", v); }},
      {"cov_rho", [](const C& c) { return format_double(c.cov_rho); },
       [](C& c, std::string_view v) { c.cov_rho = parse_double("cov_rho", v); }},
  };
  return table;
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::ridge_risk: return "ridge_risk";
    case ExperimentKind::bias_variance: return "bias_variance";
    case ExperimentKind::representation: return "representation";
    case ExperimentKind::primal_orth: return "primal_orth";
    case ExperimentKind::dual_orth: return "dual_orth";
    case ExperimentKind::full: return "full";
    case ExperimentKind::marginal: return "marginal";
    case ExperimentKind::dual_gaussian: return "dual_gaussian";
    case ExperimentKind::primal_gaussian: return "primal_gaussian";
    case ExperimentKind::cv: return "cv";
    case ExperimentKind::loo: return "loo";
    case ExperimentKind::timing: return "timing";
  }
  return "?";
}

ExperimentKind parse_experiment_kind(std::string_view text) {
  for (auto k : kAllKinds) {
    if (to_string(k) == text) return k;
  }
  throw ValidationError("unknown experiment kind '" + std::string(text) + "'");
}

bool is_sketch_kind(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::primal_orth:
    case ExperimentKind::dual_orth:
    case ExperimentKind::full:
    case ExperimentKind::marginal:
    case ExperimentKind::dual_gaussian:
    case ExperimentKind::primal_gaussian:
      return true;
    default:
      return false;
  }
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ValidationError("config: " + msg); };
  if (n < 1) fail("n must be >= 1, got " + std::to_string(n));
  if (gammas.empty()) fail("gamma list is empty");
  for (double g : gammas) {
    if (!(g > 0.0)) fail("gamma must be positive, got " + format_double(g));
    if (p_for(g) < 1) fail("gamma=" + format_double(g) + " rounds to p=0 at n=" + std::to_string(n));
  }
  for (double l : lams) {
    if (!(l > 0.0)) fail("lam must be positive, got " + format_double(l));
  }
  for (double r : ratios) {
    if (!(r > 0.0 && r <= 1.0)) fail("ratio must lie in (0, 1], got " + format_double(r));
  }
  if (!(alpha >= 0.0)) fail("alpha must be >= 0");
  if (!(sigma >= 0.0)) fail("sigma must be >= 0");
  if (lams.empty() && alpha == 0.0 && kind != ExperimentKind::timing) {
    fail("alpha=0 needs an explicit lam list (the optimal lam is infinite)");
  }
  if (replicates < 0) fail("replicates must be >= 0");
  if (threads < 0) fail("threads must be >= 0");
  if (format != "csv" && format != "json") fail("format must be csv or json, got '" + format + "'");
  if (folds < 2) fail("folds must be >= 2, got " + std::to_string(folds));
  for (std::size_t i = 0; i < lam_grid.size(); ++i) {
    if (!(lam_grid[i] > 0.0) || (i > 0 && !(lam_grid[i] > lam_grid[i - 1]))) {
      fail("lam_grid must be positive and strictly increasing");
    }
  }
  if (grid_points < 1) fail("grid_points must be >= 1");
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) fail("test_fraction must lie in [0, 1)");
  if (!data.empty() && response.empty()) fail("data is set but response column is not");
  if (proxy_n < 200) fail("proxy_n must be >= 200, got " + std::to_string(proxy_n));
  if (proxy_reps < 2) fail("proxy_reps must be >= 2");
  if (probes < 1) fail("probes must be >= 1");
  if (repeats < 1) fail("repeats must be >= 1, got " + std::to_string(repeats));
  if (!(cov_rho > -1.0 && cov_rho < 1.0)) fail("cov_rho must lie in (-1, 1)");
  if (kind == ExperimentKind::timing && sketches.empty()) fail("sketches list is empty");
}

int ExperimentConfig::effective_threads() const {
  if (threads > 0) return threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

std::int64_t ExperimentConfig::p_for(double gamma) const {
  return static_cast<std::int64_t>(std::llround(gamma * static_cast<double>(n)));
}

std::string ExperimentConfig::to_text() const {
  std::string s;
  for (const auto& f : fields()) {
    s += f.name;
    s += " = ";
    s += f.get(*this);
    s += '\n';
  }
  return s;
}

void ExperimentConfig::set(std::string_view key, std::string_view value) {
  key = trim(key);
  for (const auto& f : fields()) {
    if (f.name == key) {
      f.set(*this, value);
      return;
    }
  }
  throw ValidationError("config: unknown key '" + std::string(key) + "'");
}

void ExperimentConfig::apply_text(std::string_view text) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = trim(text.substr(start, end - start));
    ++line_no;
    start = end + 1;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    set(line.substr(0, eq), line.substr(eq + 1));
  }
}

void ExperimentConfig::apply_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  apply_text(ss.str());
}

ExperimentConfig ExperimentConfig::from_text(std::string_view text) {
  ExperimentConfig c;
  c.apply_text(text);
  return c;
}

std::string ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& f : fields()) {
    if (!f.affects_results) continue;
    const std::string line = std::string(f.name) + "=" + f.get(*this) + "\n";
    for (unsigned char ch : line) {
      h ^= ch;
      h *= 0x100000001b3ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return a.to_text() == b.to_text();
}

}  // namespace ridgesketch::harness
