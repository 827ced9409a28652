#include "dpsim/experiment_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace dpsim {

double AppConfig::offered_load_ops() const {
  if (load_gbps) return gbps_to_request_rate(*load_gbps, msg_bytes);
  return load_ops;
}

SweepAxis parse_sweep_axis(std::string_view name) {
  if (name == "load") return SweepAxis::load;
  if (name == "cores") return SweepAxis::cores;
  if (name == "io_cores") return SweepAxis::io_cores;
  if (name == "n") return SweepAxis::n;
  if (name == "t" || name == "t_us") return SweepAxis::t;
  throw ConfigError("unknown sweep axis '" + std::string(name) + "' (expected load|cores|io_cores|n|t)");
}

std::string_view to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::load: return "load";
    case SweepAxis::cores: return "cores";
    case SweepAxis::io_cores: return "io_cores";
    case SweepAxis::n: return "n";
    case SweepAxis::t: return "t";
  }
  return "?";
}

std::size_t SweepSpec::size(SweepAxis axis) const {
  switch (axis) {
    case SweepAxis::load: return load.size();
    case SweepAxis::cores: return cores.size();
    case SweepAxis::io_cores: return io_cores.size();
    case SweepAxis::n: return n.size();
    case SweepAxis::t: return t.size();
  }
  return 0;
}

std::vector<SweepAxis> SweepSpec::present() const {
  std::vector<SweepAxis> out;
  for (auto a : {SweepAxis::load, SweepAxis::cores, SweepAxis::io_cores, SweepAxis::n, SweepAxis::t}) {
    if (size(a) > 0) out.push_back(a);
  }
  return out;
}

SimTime ExperimentConfig::warmup_time() const {
  if (warmup) return *warmup;
  return SimTime::from_nanos(duration.nanos() / 10);
}

std::size_t ExperimentConfig::sweep_app_index() const {
  if (sweep_app.empty()) return 0;
  for (std::size_t i = 0; i < apps.size(); ++i) {
    if (apps[i].name == sweep_app) return i;
  }
  throw ConfigError("sweep_app: no application named '" + sweep_app + "'");
}

std::uint32_t ExperimentConfig::app_cores(std::size_t i) const {
  if (total_cores == 0 || apps.size() != 1) return apps.at(i).cores;
  return centralized() ? total_cores - io_cores : total_cores;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (apps.empty()) fail("at least one [app.NAME] section is required");
  std::set<std::string> names;
  for (const auto& a : apps) {
    if (!names.insert(a.name).second) fail("app." + a.name + ": duplicate application name");
    const std::string k = "app." + a.name;
    if (a.cores == 0) fail(k + ".cores: must be at least 1");
    if (a.msg_bytes == 0) fail(k + ".msg_bytes: must be positive");
    if (!(a.offered_load_ops() > 0.0) || !std::isfinite(a.offered_load_ops())) {
      fail(k + ": offered load must be positive (set load_ops or load_gbps)");
    }
    if (!(a.rogue_fraction >= 0.0 && a.rogue_fraction <= 1.0)) fail(k + ".rogue_fraction: must lie in [0, 1]");
    if (a.steering == stack::SteeringScheme::explicit_weights) {
      const std::size_t want = centralized() ? io_cores : app_cores(static_cast<std::size_t>(&a - apps.data()));
      if (a.weights.size() != want) {
        fail(k + ".weights: " + std::to_string(a.weights.size()) + " weights for " + std::to_string(want) +
             " steering targets");
      }
      double sum = 0.0;
      for (double w : a.weights) {
        if (!(w >= 0.0)) fail(k + ".weights: weights must be non-negative");
        sum += w;
      }
      if (!(sum > 0.0)) fail(k + ".weights: weights must not all be zero");
    }
  }
  if (total_cores != 0) {
    if (apps.size() != 1) fail("sched.total_cores: only valid with a single application");
    if (centralized() && total_cores <= io_cores) fail("sched.total_cores: must exceed io_cores");
  }
  if (centralized()) {
    if (io_cores == 0) fail("sched.io_cores: the centralized policy needs at least one I/O core");
    if (timer_period != SimTime::zero()) fail("sched.timer_period_us: protocol timers need a decentralized policy");
  }
  if (activation != OverheadKind::activation && activation != OverheadKind::posix_signal &&
      activation != OverheadKind::ipi) {
    fail("sched.activation: must be activation, posix_signal or ipi");
  }
  if (duration == SimTime::zero() || duration.is_infinite()) fail("duration_ms: must be positive and finite");
  if (warmup_time() >= duration) fail("warmup_ms: must be shorter than duration_ms");
  if (seeds.empty()) fail("seeds: at least one seed is required");
  for (double l : loads) {
    if (!(l > 0.0) || !std::isfinite(l)) fail("loads: every load must be positive");
  }
  for (double l : sweep.load) {
    if (!(l > 0.0) || !std::isfinite(l)) fail("sweep.load: every load must be positive");
  }
  for (auto c : sweep.cores) {
    if (c == 0) fail("sweep.cores: values must be at least 1");
  }
  for (auto c : sweep.io_cores) {
    if (c == 0) fail("sweep.io_cores: values must be at least 1");
    if (total_cores != 0 && c >= total_cores) fail("sweep.io_cores: values must be below total_cores");
  }
  for (auto c : sweep.n) {
    if (c == 0) fail("sweep.n: values must be at least 1");
  }
  for (auto t : sweep.t) {
    if (t == SimTime::zero()) fail("sweep.t_us: values must be positive");
  }
  (void)sweep_app_index();
  try {
    cost.validate();
    sched.validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
}

// --- number formatting ------------------------------------------------------

namespace {

std::string fmt_double(double v) {
  if (std::isinf(v)) return "\"inf\"";
  char buf[64];
  if (v == std::floor(v) && std::fabs(v) < 1e15) {
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, static_cast<long long>(v));
    (void)ec;
    return std::string(buf, p);
  }
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, p);
}

std::string fmt_scaled(SimTime t, double unit_ns) {
  if (t.is_infinite()) return "\"inf\"";
  const std::uint64_t ns = t.nanos();
  const auto unit = static_cast<std::uint64_t>(unit_ns);
  if (ns % unit == 0) return std::to_string(ns / unit);
  return fmt_double(static_cast<double>(ns) / unit_ns);
}

std::string fmt_us(SimTime t) { return fmt_scaled(t, 1e3); }

SimTime scaled_time(double v, double unit_ns) {
  if (std::isinf(v) && v > 0) return SimTime::infinity();
  return SimTime::from_seconds_f(v * unit_ns / 1e9);
}

}  // namespace

ServiceDist parse_service(std::string_view text) {
  const auto open = text.find('(');
  const auto close = text.rfind(')');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open || close + 1 != text.size()) {
    throw ConfigError("service '" + std::string(text) + "' is not of the form kind(args)");
  }
  const std::string kind(text.substr(0, open));
  std::vector<double> args;
  std::string_view rest = text.substr(open + 1, close - open - 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    std::string item(rest.substr(0, comma));
    item.erase(std::remove_if(item.begin(), item.end(), [](unsigned char c) { return std::isspace(c); }), item.end());
    double v = 0.0;
    auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || p != item.data() + item.size() || item.empty()) {
      throw ConfigError("service '" + std::string(text) + "': '" + item + "' is not a number");
    }
    args.push_back(v);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  auto need = [&](std::size_t n) {
    if (args.size() != n) {
      throw ConfigError("service '" + std::string(text) + "': " + kind + " takes " + std::to_string(n) +
                        " argument(s)");
    }
  };
  auto us = [&](double v) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("service '" + std::string(text) + "': times must be finite and non-negative");
    return SimTime::from_micros_f(v);
  };
  try {
    if (kind == "constant") {
      need(1);
      return ServiceDist::constant(us(args[0]));
    }
    if (kind == "uniform") {
      need(1);
      return ServiceDist::uniform(us(args[0]));
    }
    if (kind == "exponential") {
      need(1);
      return ServiceDist::exponential(us(args[0]));
    }
    if (kind == "bimodal") {
      need(3);
      return ServiceDist::bimodal(args[0], us(args[1]), us(args[2]));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError("service '" + std::string(text) + "': " + e.what());
  }
  throw ConfigError("service '" + std::string(text) + "': unknown kind (expected constant|uniform|exponential|bimodal)");
}

std::string render_service(const ServiceDist& dist) {
  return std::visit(
      [](const auto& d) -> std::string {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, dist::Constant>) return "constant(" + fmt_us(d.value) + ")";
        if constexpr (std::is_same_v<T, dist::Uniform>) return "uniform(" + fmt_us(d.mean) + ")";
        if constexpr (std::is_same_v<T, dist::Exponential>) return "exponential(" + fmt_us(d.mean) + ")";
        if constexpr (std::is_same_v<T, dist::Bimodal>) {
          return "bimodal(" + fmt_double(d.p_long) + "," + fmt_us(d.short_time) + "," + fmt_us(d.long_time) + ")";
        }
      },
      dist.variant());
}

// --- presets ------------------------------------------------------------------

namespace {

AppConfig make_app(std::string name, std::uint32_t cores, ServiceDist service, double load) {
  AppConfig a;
  a.name = std::move(name);
  a.cores = cores;
  a.service = service;
  a.load_ops = load;
  return a;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * i / (n - 1));
  return out;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"uniform", "bimodal", "imbalanced", "isolation", "core_alloc_const", "core_alloc_exp", "echo", "scalability"};
}

ExperimentConfig build_experiment(std::string_view name) {
  ExperimentConfig c;
  c.experiment = std::string(name);
  if (name == "uniform") {
    c.apps.push_back(make_app("app", 16, ServiceDist::uniform(SimTime::from_nanos(2500)), 2'000'000));
    c.duration = SimTime::from_millis(50);
    c.loads = linspace(500'000, 4'500'000, 9);
  } else if (name == "bimodal") {
    c.apps.push_back(make_app("app", 16,
                              ServiceDist::bimodal(0.005, SimTime::from_micros(1), SimTime::from_micros(1000)),
                              1'000'000));
    c.duration = SimTime::from_millis(200);
    c.loads = linspace(200'000, 2'200'000, 11);
    c.seeds = {1, 2, 3};
  } else if (name == "imbalanced") {
    AppConfig a = make_app("app", 16, ServiceDist::exponential(SimTime::from_micros(5)), 1'350'000);
    a.steering = stack::SteeringScheme::explicit_weights;
    a.weights.assign(16, 1.0);
    std::fill(a.weights.begin(), a.weights.begin() + 5, 10.0);
    c.apps.push_back(a);
    c.duration = SimTime::from_millis(100);
  } else if (name == "isolation") {
    c.apps.push_back(make_app("lc", 7, ServiceDist::exponential(SimTime::from_micros(1)), 1'000'000));
    AppConfig ht = make_app("ht", 7, ServiceDist::constant(SimTime::from_micros(10)), 0.0);
    ht.load_gbps = 4.0;
    ht.msg_bytes = 16'000;
    c.apps.push_back(ht);
    c.sweep_app = "lc";
    c.loads = linspace(250'000, 3'000'000, 12);
    c.duration = SimTime::from_millis(50);
  } else if (name == "core_alloc_const" || name == "core_alloc_exp") {
    const auto svc = name == "core_alloc_const" ? ServiceDist::constant(SimTime::from_micros(2))
                                                : ServiceDist::exponential(SimTime::from_micros(2));
    c.policy = sched::PolicyKind::centralized;
    c.apps.push_back(make_app("app", 6, svc, 4'000'000));
    c.io_cores = 2;
    c.total_cores = 8;
    c.duration = SimTime::from_millis(20);
    c.sweep.io_cores = {1, 2, 3, 4, 5, 6, 7};
  } else if (name == "echo") {
    c.apps.push_back(make_app("app", 1, ServiceDist::constant(SimTime::zero()), 500'000));
    c.duration = SimTime::from_millis(20);
    c.drain = true;
  } else if (name == "scalability") {
    c.apps.push_back(make_app("app", 16, ServiceDist::uniform(SimTime::from_nanos(2500)), 6'000'000));
    c.duration = SimTime::from_millis(20);
    c.sweep.cores = {1, 2, 4, 8, 12, 16};
  } else {
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : "|") + n;
    throw ConfigError("unknown preset '" + std::string(name) + "' (expected " + known + ")");
  }
  return c;
}

// --- flat key/value documents -----------------------------------------------

namespace {

struct Scalar {
  enum class Kind { boolean, number, string } kind = Kind::string;
  bool b = false;
  double d = 0.0;
  std::string s;
};

struct Entry {
  std::string key;
  bool is_array = false;
  std::vector<Scalar> items;
  std::string where;  // "source:line" or "source" or "--override"
};

[[noreturn]] void fail_at(const std::string& where, const std::string& key, const std::string& msg) {
  std::string out = where;
  if (!key.empty()) out += (out.empty() ? "" : ": ") + key;
  throw ConfigError(out + ": " + msg);
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

bool valid_key(std::string_view k) {
  if (k.empty()) return false;
  std::size_t seg = 0;
  for (char ch : k) {
    if (ch == '.') {
      if (seg == 0) return false;
      seg = 0;
      continue;
    }
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-')) return false;
    ++seg;
  }
  return seg > 0;
}

class ValueParser {
 public:
  ValueParser(std::string_view text, std::string where) : t_(text), where_(std::move(where)) {}

  // Returns false when the text is not a complete value.
  bool parse(Entry& e, bool allow_bare) {
    skip_ws();
    if (peek() == '[') {
      ++i_;
      e.is_array = true;
      skip_ws();
      if (peek() == ']') {
        ++i_;
      } else {
        for (;;) {
          skip_ws();
          e.items.push_back(scalar(false));
          skip_ws();
          if (peek() == ',') {
            ++i_;
            skip_ws();
            if (peek() == ']') {
              ++i_;
              break;
            }
            continue;
          }
          if (peek() == ']') {
            ++i_;
            break;
          }
          return false;
        }
      }
    } else {
      e.items.push_back(scalar(allow_bare));
    }
    skip_ws();
    return i_ == t_.size();
  }

 private:
  char peek() const { return i_ < t_.size() ? t_[i_] : '\0'; }
  void skip_ws() {
    while (i_ < t_.size() && std::isspace(static_cast<unsigned char>(t_[i_]))) ++i_;
  }

  Scalar scalar(bool allow_bare) {
    Scalar s;
    if (peek() == '"') {
      ++i_;
      s.kind = Scalar::Kind::string;
      while (i_ < t_.size() && t_[i_] != '"') {
        if (t_[i_] == '\\' && i_ + 1 < t_.size()) {
          ++i_;
          const char c = t_[i_];
          s.s += c == 'n' ? '\n' : c == 't' ? '\t' : c;
        } else {
          s.s += t_[i_];
        }
        ++i_;
      }
      if (peek() != '"') throw ConfigError(where_ + ": unterminated string");
      ++i_;
      return s;
    }
    std::size_t b = i_;
    while (i_ < t_.size() && t_[i_] != ',' && t_[i_] != ']' && !std::isspace(static_cast<unsigned char>(t_[i_]))) ++i_;
    std::string tok(t_.substr(b, i_ - b));
    if (allow_bare) {
      // Overrides take the rest of the text verbatim so service strings survive.
      tok = trim(t_.substr(b));
      i_ = t_.size();
    }
    if (tok == "true" || tok == "false") {
      s.kind = Scalar::Kind::boolean;
      s.b = tok == "true";
      return s;
    }
    std::string digits;
    for (char ch : tok) {
      if (ch != '_') digits += ch;
    }
    double v = 0.0;
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (!digits.empty() && ec == std::errc() && p == digits.data() + digits.size()) {
      s.kind = Scalar::Kind::number;
      s.d = v;
      return s;
    }
    if (allow_bare && !tok.empty()) {
      s.kind = Scalar::Kind::string;
      s.s = tok;
      return s;
    }
    throw ConfigError(where_ + ": cannot parse value '" + tok + "'");
  }

  std::string_view t_;
  std::string where_;
  std::size_t i_ = 0;
};

std::string strip_comment(std::string_view line) {
  bool in_str = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_str = !in_str;
    if (line[i] == '#' && !in_str) return std::string(line.substr(0, i));
  }
  return std::string(line);
}

int bracket_depth(std::string_view s) {
  int depth = 0;
  bool in_str = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_str = !in_str;
    if (in_str) continue;
    if (s[i] == '[') ++depth;
    if (s[i] == ']') --depth;
  }
  return depth;
}

std::vector<Entry> parse_toml(std::string_view text, std::string_view source) {
  std::vector<Entry> out;
  std::string prefix;
  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string where = std::string(source) + ":" + std::to_string(lineno);
    std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) fail_at(where, "", "malformed section header '" + line + "'");
      prefix = trim(line.substr(1, line.size() - 2));
      if (!valid_key(prefix)) fail_at(where, "", "invalid section name '" + prefix + "'");
      prefix += '.';
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail_at(where, "", "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    if (!valid_key(key)) fail_at(where, "", "invalid key '" + key + "'");
    std::string value = trim(line.substr(eq + 1));
    // Arrays may continue over several lines.
    while (bracket_depth(value) > 0 && std::getline(in, raw)) {
      ++lineno;
      value += " " + trim(strip_comment(raw));
    }
    Entry e;
    e.key = prefix + key;
    e.where = where;
    if (value.empty()) fail_at(where, e.key, "missing value");
    if (!ValueParser(value, where).parse(e, false)) fail_at(where, e.key, "cannot parse value '" + value + "'");
    out.push_back(std::move(e));
  }
  return out;
}

void flatten_json(const nlohmann::json& j, const std::string& prefix, const std::string& source,
                  std::vector<Entry>& out) {
  auto scalar_of = [&](const nlohmann::json& v, const std::string& key) {
    Scalar s;
    if (v.is_boolean()) {
      s.kind = Scalar::Kind::boolean;
      s.b = v.get<bool>();
    } else if (v.is_number()) {
      s.kind = Scalar::Kind::number;
      s.d = v.get<double>();
    } else if (v.is_string()) {
      s.kind = Scalar::Kind::string;
      s.s = v.get<std::string>();
    } else {
      fail_at(source, key, "unsupported JSON value");
    }
    return s;
  };
  if (!j.is_object()) fail_at(source, prefix, "expected a JSON object");
  for (const auto& [k, v] : j.items()) {
    const std::string key = prefix.empty() ? k : prefix + "." + k;
    if (v.is_object()) {
      flatten_json(v, key, source, out);
      continue;
    }
    Entry e;
    e.key = key;
    e.where = source;
    if (v.is_array()) {
      e.is_array = true;
      for (const auto& item : v) e.items.push_back(scalar_of(item, key));
    } else {
      e.items.push_back(scalar_of(v, key));
    }
    out.push_back(std::move(e));
  }
}

Entry parse_override(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw ConfigError("--override '" + text + "': expected key=value");
  Entry e;
  e.key = trim(std::string_view(text).substr(0, eq));
  e.where = "--override";
  if (!valid_key(e.key)) throw ConfigError("--override '" + text + "': invalid key '" + e.key + "'");
  const std::string value = trim(std::string_view(text).substr(eq + 1));
  if (value.empty()) throw ConfigError("--override " + e.key + ": missing value");
  const bool quoted_or_array = value.front() == '[' || value.front() == '"';
  if (!ValueParser(value, "--override").parse(e, !quoted_or_array)) {
    throw ConfigError("--override " + e.key + ": cannot parse value '" + value + "'");
  }
  return e;
}

// --- typed accessors ----------------------------------------------------------

const Scalar& single(const Entry& e) {
  if (e.is_array || e.items.size() != 1) fail_at(e.where, e.key, "expected a single value, not an array");
  return e.items.front();
}

bool is_inf_token(const Scalar& s) { return s.kind == Scalar::Kind::string && (s.s == "inf" || s.s == "infinity"); }

double number_of(const Entry& e, const Scalar& s) {
  if (s.kind == Scalar::Kind::number) return s.d;
  if (is_inf_token(s)) return std::numeric_limits<double>::infinity();
  fail_at(e.where, e.key, "expected a number");
}

double as_number(const Entry& e) {
  const double v = number_of(e, single(e));
  if (!std::isfinite(v)) fail_at(e.where, e.key, "must be finite");
  return v;
}

double as_nonneg(const Entry& e) {
  const double v = as_number(e);
  if (v < 0) fail_at(e.where, e.key, "must not be negative");
  return v;
}

std::uint64_t integral(const Entry& e, double v, std::uint64_t max) {
  if (!(v >= 0) || v != std::floor(v) || v > static_cast<double>(max)) {
    fail_at(e.where, e.key, "expected a non-negative integer");
  }
  return static_cast<std::uint64_t>(v);
}

std::uint64_t as_uint(const Entry& e, std::uint64_t max = std::numeric_limits<std::uint32_t>::max()) {
  return integral(e, as_number(e), max);
}

bool as_bool(const Entry& e) {
  const Scalar& s = single(e);
  if (s.kind != Scalar::Kind::boolean) fail_at(e.where, e.key, "expected true or false");
  return s.b;
}

std::string as_string(const Entry& e) {
  const Scalar& s = single(e);
  if (s.kind != Scalar::Kind::string) fail_at(e.where, e.key, "expected a string");
  return s.s;
}

/// Number of units or "inf".
SimTime as_time(const Entry& e, double unit_ns, bool allow_inf) {
  const double v = number_of(e, single(e));
  if (std::isinf(v) && !allow_inf) fail_at(e.where, e.key, "must be finite");
  if (!(v >= 0)) fail_at(e.where, e.key, "must not be negative");
  return scaled_time(v, unit_ns);
}

std::vector<double> as_numbers(const Entry& e) {
  if (!e.is_array) fail_at(e.where, e.key, "expected an array");
  std::vector<double> out;
  for (const auto& s : e.items) out.push_back(number_of(e, s));
  return out;
}

std::vector<std::uint32_t> as_uints(const Entry& e) {
  std::vector<std::uint32_t> out;
  for (double v : as_numbers(e)) out.push_back(static_cast<std::uint32_t>(integral(e, v, 0xffffffffULL)));
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const Entry&)>;
using AppSetter = std::function<void(AppConfig&, const Entry&)>;

const std::map<std::string, Setter>& top_setters() {
  static const std::map<std::string, Setter> m = {
      {"experiment", [](ExperimentConfig& c, const Entry& e) { c.experiment = as_string(e); }},
      {"policy",
       [](ExperimentConfig& c, const Entry& e) {
         try {
           c.policy = sched::parse_policy(as_string(e));
         } catch (const std::invalid_argument& ex) {
           fail_at(e.where, e.key, ex.what());
         }
       }},
      {"duration_ms", [](ExperimentConfig& c, const Entry& e) { c.duration = as_time(e, 1e6, false); }},
      {"warmup_ms", [](ExperimentConfig& c, const Entry& e) { c.warmup = as_time(e, 1e6, false); }},
      {"drain", [](ExperimentConfig& c, const Entry& e) { c.drain = as_bool(e); }},
      {"rtt_us", [](ExperimentConfig& c, const Entry& e) { c.rtt = as_time(e, 1e3, false); }},
      {"seeds",
       [](ExperimentConfig& c, const Entry& e) {
         c.seeds.clear();
         for (double v : as_numbers(e)) c.seeds.push_back(integral(e, v, (1ULL << 53)));
       }},
      {"loads", [](ExperimentConfig& c, const Entry& e) { c.loads = as_numbers(e); }},
      {"sweep_app", [](ExperimentConfig& c, const Entry& e) { c.sweep_app = as_string(e); }},
      {"out", [](ExperimentConfig& c, const Entry& e) { c.out = as_string(e); }},
      {"sched.n",
       [](ExperimentConfig& c, const Entry& e) {
         const double v = number_of(e, single(e));
         c.sched.batch_pull_n = std::isinf(v) ? sched::SchedulerParams::kUnbounded
                                              : static_cast<std::uint32_t>(integral(e, v, 0xfffffffeULL));
       }},
      {"sched.t_us", [](ExperimentConfig& c, const Entry& e) { c.sched.quanta_t = as_time(e, 1e3, true); }},
      {"sched.preempt_us",
       [](ExperimentConfig& c, const Entry& e) {
         c.sched.preemption_interval = as_time(e, 1e3, false);
         c.cost.preemption_interval = c.sched.preemption_interval;
       }},
      {"sched.io_batch",
       [](ExperimentConfig& c, const Entry& e) { c.sched.io_batch = static_cast<std::uint32_t>(as_uint(e)); }},
      {"sched.preempt_to",
       [](ExperimentConfig& c, const Entry& e) {
         const std::string v = as_string(e);
         if (v == "global") {
           c.sched.preempt_to = sched::PreemptTarget::global_queue;
         } else if (v == "local") {
           c.sched.preempt_to = sched::PreemptTarget::local_queue;
         } else {
           fail_at(e.where, e.key, "expected \"global\" or \"local\"");
         }
       }},
      {"sched.activation",
       [](ExperimentConfig& c, const Entry& e) {
         try {
           c.activation = parse_overhead_kind(as_string(e));
         } catch (const std::invalid_argument& ex) {
           fail_at(e.where, e.key, ex.what());
         }
         if (c.activation != OverheadKind::activation && c.activation != OverheadKind::posix_signal &&
             c.activation != OverheadKind::ipi) {
           fail_at(e.where, e.key, "must be activation, posix_signal or ipi");
         }
       }},
      {"sched.io_cores", [](ExperimentConfig& c, const Entry& e) { c.io_cores = static_cast<std::uint32_t>(as_uint(e)); }},
      {"sched.total_cores",
       [](ExperimentConfig& c, const Entry& e) { c.total_cores = static_cast<std::uint32_t>(as_uint(e)); }},
      {"sched.protection", [](ExperimentConfig& c, const Entry& e) { c.protection = as_bool(e); }},
      {"sched.rx_capacity",
       [](ExperimentConfig& c, const Entry& e) {
         const double v = number_of(e, single(e));
         c.rx_capacity = std::isinf(v) ? stack::RxQueue::kUnbounded : integral(e, v, 1ULL << 40);
       }},
      {"sched.timer_period_us", [](ExperimentConfig& c, const Entry& e) { c.timer_period = as_time(e, 1e3, false); }},
      {"sched.check_invariants", [](ExperimentConfig& c, const Entry& e) { c.check_invariants = as_bool(e); }},
      {"cost.cpu_freq_hz", [](ExperimentConfig& c, const Entry& e) { c.cost.cpu_freq_hz = as_uint(e, 1ULL << 40); }},
      {"cost.gate_switch_cycles",
       [](ExperimentConfig& c, const Entry& e) { c.cost.gate_switch_cycles = as_uint(e, 1ULL << 40); }},
      {"cost.wrpkru_cycles", [](ExperimentConfig& c, const Entry& e) { c.cost.wrpkru_cycles = as_uint(e, 1ULL << 40); }},
      {"cost.activation_cycles",
       [](ExperimentConfig& c, const Entry& e) { c.cost.activation_cycles = as_uint(e, 1ULL << 40); }},
      {"cost.posix_signal_cycles",
       [](ExperimentConfig& c, const Entry& e) { c.cost.posix_signal_cycles = as_uint(e, 1ULL << 40); }},
      {"cost.ipi_cycles", [](ExperimentConfig& c, const Entry& e) { c.cost.ipi_cycles = as_uint(e, 1ULL << 40); }},
      {"cost.kernel_thread_spawn_cycles",
       [](ExperimentConfig& c, const Entry& e) { c.cost.kernel_thread_spawn_cycles = as_uint(e, 1ULL << 40); }},
      {"cost.per_request_stack_cycles",
       [](ExperimentConfig& c, const Entry& e) { c.cost.per_request_stack_cycles = as_uint(e, 1ULL << 40); }},
      {"cost.msg_hop_cycles", [](ExperimentConfig& c, const Entry& e) { c.cost.msg_hop_cycles = as_uint(e, 1ULL << 40); }},
      {"sweep.load", [](ExperimentConfig& c, const Entry& e) { c.sweep.load = as_numbers(e); }},
      {"sweep.cores", [](ExperimentConfig& c, const Entry& e) { c.sweep.cores = as_uints(e); }},
      {"sweep.io_cores", [](ExperimentConfig& c, const Entry& e) { c.sweep.io_cores = as_uints(e); }},
      {"sweep.n", [](ExperimentConfig& c, const Entry& e) { c.sweep.n = as_uints(e); }},
      {"sweep.t_us",
       [](ExperimentConfig& c, const Entry& e) {
         c.sweep.t.clear();
         for (double v : as_numbers(e)) {
           if (!(v > 0)) fail_at(e.where, e.key, "values must be positive");
           c.sweep.t.push_back(scaled_time(v, 1e3));
         }
       }},
  };
  return m;
}

const std::map<std::string, AppSetter>& app_setters() {
  static const std::map<std::string, AppSetter> m = {
      {"cores", [](AppConfig& a, const Entry& e) { a.cores = static_cast<std::uint32_t>(as_uint(e)); }},
      {"load_ops",
       [](AppConfig& a, const Entry& e) {
         a.load_ops = as_nonneg(e);
         a.load_gbps.reset();
       }},
      {"load_gbps", [](AppConfig& a, const Entry& e) { a.load_gbps = as_nonneg(e); }},
      {"msg_bytes", [](AppConfig& a, const Entry& e) { a.msg_bytes = static_cast<std::uint32_t>(as_uint(e)); }},
      {"service",
       [](AppConfig& a, const Entry& e) {
         try {
           a.service = parse_service(as_string(e));
         } catch (const ConfigError& ex) {
           fail_at(e.where, e.key, ex.what());
         }
       }},
      {"steering",
       [](AppConfig& a, const Entry& e) {
         const std::string v = as_string(e);
         if (v == "rss") {
           a.steering = stack::SteeringScheme::rss_uniform;
         } else if (v == "weights") {
           a.steering = stack::SteeringScheme::explicit_weights;
         } else {
           fail_at(e.where, e.key, "expected \"rss\" or \"weights\"");
         }
       }},
      {"weights", [](AppConfig& a, const Entry& e) { a.weights = as_numbers(e); }},
      {"rogue_fraction", [](AppConfig& a, const Entry& e) { a.rogue_fraction = as_nonneg(e); }},
  };
  return m;
}

ExperimentConfig apply_entries(std::vector<Entry> entries) {
  // Later entries (overrides) replace earlier ones with the same key.
  std::map<std::string, std::size_t> last;
  for (std::size_t i = 0; i < entries.size(); ++i) last[entries[i].key] = i;

  ExperimentConfig c;
  for (const auto& e : entries) {
    if (e.key == "preset" && last[e.key] == static_cast<std::size_t>(&e - entries.data())) {
      c = build_experiment(as_string(e));
    }
  }
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const Entry& e = entries[i];
    if (last[e.key] != i || e.key == "preset") continue;
    if (auto it = top_setters().find(e.key); it != top_setters().end()) {
      it->second(c, e);
      continue;
    }
    if (e.key.rfind("app.", 0) == 0) {
      const auto dot = e.key.find('.', 4);
      if (dot == std::string::npos) fail_at(e.where, e.key, "expected app.NAME.field");
      const std::string name = e.key.substr(4, dot - 4);
      const std::string field = e.key.substr(dot + 1);
      auto it = app_setters().find(field);
      if (it == app_setters().end()) fail_at(e.where, e.key, "unknown application key '" + field + "'");
      auto app = std::find_if(c.apps.begin(), c.apps.end(), [&](const AppConfig& a) { return a.name == name; });
      if (app == c.apps.end()) {
        AppConfig fresh;
        fresh.name = name;
        c.apps.push_back(fresh);
        app = c.apps.end() - 1;
      }
      it->second(*app, e);
      continue;
    }
    fail_at(e.where, e.key, "unknown key");
  }
  c.validate();
  return c;
}

}  // namespace

ExperimentConfig load_config_text(std::string_view text, std::string_view source, bool json,
                                  const std::vector<std::string>& overrides) {
  std::vector<Entry> entries;
  if (json) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(std::string(source) + ": " + e.what());
    }
    flatten_json(j, "", std::string(source), entries);
  } else {
    entries = parse_toml(text, source);
  }
  std::set<std::string> seen;
  for (const auto& e : entries) {
    if (!seen.insert(e.key).second) fail_at(e.where, e.key, "duplicate key");
  }
  for (const auto& o : overrides) entries.push_back(parse_override(o));
  return apply_entries(std::move(entries));
}

ExperimentConfig load_config_file(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  const bool json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
  return load_config_text(ss.str(), path, json, overrides);
}

std::string render_config(const ExperimentConfig& c) {
  const ExperimentConfig d;
  std::ostringstream o;
  auto list = [](const auto& v, auto fmt) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
    return s + "]";
  };
  auto num = [](double v) { return fmt_double(v); };
  auto uint = [](auto v) { return std::to_string(v); };
  auto us = [](SimTime t) { return fmt_us(t); };

  o << "experiment = \"" << c.experiment << "\"\n";
  o << "policy = \"" << sched::to_string(c.policy) << "\"\n";
  o << "duration_ms = " << fmt_scaled(c.duration, 1e6) << "\n";
  if (c.warmup) o << "warmup_ms = " << fmt_scaled(*c.warmup, 1e6) << "\n";
  if (c.drain) o << "drain = true\n";
  if (c.rtt != SimTime::zero()) o << "rtt_us = " << us(c.rtt) << "\n";
  o << "seeds = " << list(c.seeds, uint) << "\n";
  if (!c.loads.empty()) o << "loads = " << list(c.loads, num) << "\n";
  if (!c.sweep_app.empty()) o << "sweep_app = \"" << c.sweep_app << "\"\n";
  if (!c.out.empty()) o << "out = \"" << c.out << "\"\n";

  std::ostringstream s;
  if (c.sched.batch_pull_n != d.sched.batch_pull_n) {
    s << "n = "
      << (c.sched.batch_pull_n == sched::SchedulerParams::kUnbounded ? std::string("\"inf\"")
                                                                      : std::to_string(c.sched.batch_pull_n))
      << "\n";
  }
  if (c.sched.quanta_t != d.sched.quanta_t) s << "t_us = " << us(c.sched.quanta_t) << "\n";
  if (c.sched.preemption_interval != d.sched.preemption_interval) {
    s << "preempt_us = " << us(c.sched.preemption_interval) << "\n";
  }
  if (c.sched.io_batch != d.sched.io_batch) s << "io_batch = " << c.sched.io_batch << "\n";
  if (c.sched.preempt_to != d.sched.preempt_to) s << "preempt_to = \"local\"\n";
  if (c.activation != d.activation) s << "activation = \"" << to_string(c.activation) << "\"\n";
  if (c.io_cores != d.io_cores) s << "io_cores = " << c.io_cores << "\n";
  if (c.total_cores != d.total_cores) s << "total_cores = " << c.total_cores << "\n";
  if (c.protection != d.protection) s << "protection = false\n";
  if (c.rx_capacity != d.rx_capacity) s << "rx_capacity = " << c.rx_capacity << "\n";
  if (c.timer_period != d.timer_period) s << "timer_period_us = " << us(c.timer_period) << "\n";
  if (c.check_invariants) s << "check_invariants = true\n";
  if (!s.str().empty()) o << "\n[sched]\n" << s.str();

  std::ostringstream k;
  auto cyc = [&](const char* name, std::uint64_t v, std::uint64_t dv) {
    if (v != dv) k << name << " = " << v << "\n";
  };
  cyc("cpu_freq_hz", c.cost.cpu_freq_hz, d.cost.cpu_freq_hz);
  cyc("gate_switch_cycles", c.cost.gate_switch_cycles, d.cost.gate_switch_cycles);
  cyc("wrpkru_cycles", c.cost.wrpkru_cycles, d.cost.wrpkru_cycles);
  cyc("activation_cycles", c.cost.activation_cycles, d.cost.activation_cycles);
  cyc("posix_signal_cycles", c.cost.posix_signal_cycles, d.cost.posix_signal_cycles);
  cyc("ipi_cycles", c.cost.ipi_cycles, d.cost.ipi_cycles);
  cyc("kernel_thread_spawn_cycles", c.cost.kernel_thread_spawn_cycles, d.cost.kernel_thread_spawn_cycles);
  cyc("per_request_stack_cycles", c.cost.per_request_stack_cycles, d.cost.per_request_stack_cycles);
  cyc("msg_hop_cycles", c.cost.msg_hop_cycles, d.cost.msg_hop_cycles);
  if (!k.str().empty()) o << "\n[cost]\n" << k.str();

  for (const auto& a : c.apps) {
    o << "\n[app." << a.name << "]\n";
    o << "cores = " << a.cores << "\n";
    if (a.load_gbps) {
      o << "load_gbps = " << num(*a.load_gbps) << "\n";
    } else {
      o << "load_ops = " << num(a.load_ops) << "\n";
    }
    if (a.msg_bytes != AppConfig{}.msg_bytes) o << "msg_bytes = " << a.msg_bytes << "\n";
    o << "service = \"" << render_service(a.service) << "\"\n";
    if (a.steering == stack::SteeringScheme::explicit_weights) {
      o << "steering = \"weights\"\n";
      o << "weights = " << list(a.weights, num) << "\n";
    }
    if (a.rogue_fraction != 0.0) o << "rogue_fraction = " << num(a.rogue_fraction) << "\n";
  }

  std::ostringstream w;
  if (!c.sweep.load.empty()) w << "load = " << list(c.sweep.load, num) << "\n";
  if (!c.sweep.cores.empty()) w << "cores = " << list(c.sweep.cores, uint) << "\n";
  if (!c.sweep.io_cores.empty()) w << "io_cores = " << list(c.sweep.io_cores, uint) << "\n";
  if (!c.sweep.n.empty()) w << "n = " << list(c.sweep.n, uint) << "\n";
  if (!c.sweep.t.empty()) w << "t_us = " << list(c.sweep.t, us) << "\n";
  if (!w.str().empty()) o << "\n[sweep]\n" << w.str();
  return o.str();
}

}  // namespace dpsim
