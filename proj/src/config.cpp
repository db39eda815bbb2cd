#include "dkp/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "dkp/error.hpp"

namespace dkp {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ParameterError("config '" + key + "': expected a number, got '" + v + "'");
  }
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ParameterError("config '" + key + "': expected an integer, got '" + v + "'");
  }
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ParameterError("config '" + key + "': expected an unsigned integer, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ParameterError("config '" + key + "': expected a boolean, got '" + v + "'");
}

std::vector<int> to_dims(const std::string& key, const std::string& v) {
  std::vector<int> dims;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) dims.push_back(static_cast<int>(to_int(key, trim(item))));
  return dims;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"scale", [](RunConfig& c, auto& k, auto& v) { c.scale = static_cast<int>(to_int(k, v)); }},
      {"iterations", [](RunConfig& c, auto& k, auto& v) { c.iterations = static_cast<int>(to_int(k, v)); }},
      {"kernel_side", [](RunConfig& c, auto& k, auto& v) { c.kernel_side = static_cast<int>(to_int(k, v)); }},
      {"net_dims", [](RunConfig& c, auto& k, auto& v) { c.net_dims = v.empty() ? std::vector<int>{} : to_dims(k, v); }},
      {"seed", [](RunConfig& c, auto& k, auto& v) { c.seed = to_u64(k, v); }},
      {"trace", [](RunConfig& c, auto& k, auto& v) { c.trace = to_bool(k, v); }},
      {"rks.L", [](RunConfig& c, auto& k, auto& v) { c.rks.num_samples = static_cast<int>(to_int(k, v)); }},
      {"rks.family", [](RunConfig& c, auto&, auto& v) { c.rks.family = family_from_string(v); }},
      {"rks.delta_floor", [](RunConfig& c, auto& k, auto& v) { c.rks.delta_floor = to_double(k, v); }},
      {"rks.proposal",
       [](RunConfig& c, auto& k, auto& v) {
         if (v == "independent") c.rks.proposal = Proposal::Independent;
         else if (v == "random_walk") c.rks.proposal = Proposal::RandomWalk;
         else throw ParameterError("config '" + k + "': expected independent|random_walk");
       }},
      {"rks.walk_scale", [](RunConfig& c, auto& k, auto& v) { c.rks.walk_scale = to_double(k, v); }},
      {"rks.anneal", [](RunConfig& c, auto& k, auto& v) { c.rks.anneal = to_double(k, v); }},
      {"pke.step_data", [](RunConfig& c, auto& k, auto& v) { c.pke.step_data = to_double(k, v); }},
      {"pke.step_prior", [](RunConfig& c, auto& k, auto& v) { c.pke.step_prior = to_double(k, v); }},
      {"pke.inner_steps", [](RunConfig& c, auto& k, auto& v) { c.pke.inner_steps = static_cast<int>(to_int(k, v)); }},
      {"pke.optimizer",
       [](RunConfig& c, auto& k, auto& v) {
         if (v == "adam") c.pke.optimizer = PkeOptimizer::AdamAssisted;
         else if (v == "langevin") c.pke.optimizer = PkeOptimizer::PlainLangevin;
         else throw ParameterError("config '" + k + "': expected adam|langevin");
       }},
      {"pke.adam_lr", [](RunConfig& c, auto& k, auto& v) { c.pke.adam_lr = to_double(k, v); }},
      {"restorer.step_image", [](RunConfig& c, auto& k, auto& v) { c.restorer.step_image = to_double(k, v); }},
      {"restorer.steps_per_iter",
       [](RunConfig& c, auto& k, auto& v) { c.restorer.steps_per_iter = static_cast<int>(to_int(k, v)); }},
      {"restorer.tv_weight", [](RunConfig& c, auto& k, auto& v) { c.restorer.tv_weight = to_double(k, v); }},
      {"restorer.init",
       [](RunConfig& c, auto& k, auto& v) {
         if (v == "nearest") c.restorer.init = UpsampleMode::Nearest;
         else if (v == "bilinear") c.restorer.init = UpsampleMode::Bilinear;
         else throw ParameterError("config '" + k + "': expected nearest|bilinear");
       }},
      {"restorer.halve_on_increase",
       [](RunConfig& c, auto& k, auto& v) { c.restorer.halve_on_increase = to_bool(k, v); }},
  };
  return table;
}

}  // namespace

KeyValues parse_key_values(std::string_view text) {
  KeyValues kv;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ParameterError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    kv[trim(std::string_view(body).substr(0, eq))] = trim(std::string_view(body).substr(eq + 1));
  }
  return kv;
}

KeyValues load_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_key_values(ss.str());
}

void apply_key_values(RunConfig& cfg, const KeyValues& kv) {
  const auto& table = setters();
  for (const auto& [key, value] : kv) {
    const auto it = table.find(key);
    if (it == table.end()) throw ParameterError("unknown config key '" + key + "'");
    it->second(cfg, key, value);
  }
}

void apply_overrides(RunConfig& cfg, const std::vector<std::string>& assignments) {
  std::string joined;
  for (const auto& a : assignments) joined += a + "\n";
  apply_key_values(cfg, parse_key_values(joined));
}

std::string dump_config(const RunConfig& cfg) {
  std::ostringstream out;
  out.precision(std::numeric_limits<double>::max_digits10);
  std::string dims;
  for (std::size_t i = 0; i < cfg.net_dims.size(); ++i) dims += (i ? "," : "") + std::to_string(cfg.net_dims[i]);
  out << "scale = " << cfg.scale << '\n'
      << "iterations = " << cfg.iterations << '\n'
      << "kernel_side = " << cfg.kernel_side << '\n'
      << "net_dims = " << dims << '\n'
      << "seed = " << cfg.seed << '\n'
      << "trace = " << (cfg.trace ? "true" : "false") << '\n'
      << "rks.L = " << cfg.rks.num_samples << '\n'
      << "rks.family = " << to_string(cfg.rks.family) << '\n'
      << "rks.delta_floor = " << cfg.rks.delta_floor << '\n'
      << "rks.proposal = " << (cfg.rks.proposal == Proposal::RandomWalk ? "random_walk" : "independent") << '\n'
      << "rks.walk_scale = " << cfg.rks.walk_scale << '\n'
      << "rks.anneal = " << cfg.rks.anneal << '\n'
      << "pke.step_data = " << cfg.pke.step_data << '\n'
      << "pke.step_prior = " << cfg.pke.step_prior << '\n'
      << "pke.inner_steps = " << cfg.pke.inner_steps << '\n'
      << "pke.optimizer = " << (cfg.pke.optimizer == PkeOptimizer::AdamAssisted ? "adam" : "langevin") << '\n'
      << "pke.adam_lr = " << cfg.pke.adam_lr << '\n'
      << "restorer.step_image = " << cfg.restorer.step_image << '\n'
      << "restorer.steps_per_iter = " << cfg.restorer.steps_per_iter << '\n'
      << "restorer.tv_weight = " << cfg.restorer.tv_weight << '\n'
      << "restorer.init = " << (cfg.restorer.init == UpsampleMode::Bilinear ? "bilinear" : "nearest") << '\n'
      << "restorer.halve_on_increase = " << (cfg.restorer.halve_on_increase ? "true" : "false") << '\n';
  return out.str();
}

}  // namespace dkp
