#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "despeckle/pipeline.hpp"

namespace despeckle {

namespace {

using Json = nlohmann::ordered_json;

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ParameterError("config key '" + key + "': expected a boolean, got '" + v + "'");
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw ParameterError("config key '" + key + "': expected a number, got '" + v + "'");
}

unsigned long long parse_unsigned(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    if (!v.empty() && v[0] != '-') {
      const auto n = std::stoull(v, &used);
      if (used == v.size()) return n;
    }
  } catch (const std::exception&) {
  }
  throw ParameterError("config key '" + key + "': expected a non-negative integer, got '" + v + "'");
}

using Setter = std::function<void(PipelineConfig&, const std::string&, const std::string&)>;

const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"patch_size", [](auto& c, auto& k, auto& v) { c.patch_size = parse_unsigned(k, v); }},
      {"stack_count", [](auto& c, auto& k, auto& v) { c.stack_count = parse_unsigned(k, v); }},
      {"stride", [](auto& c, auto& k, auto& v) { c.stride = parse_unsigned(k, v); }},
      {"search_window", [](auto& c, auto& k, auto& v) { c.search_window = parse_unsigned(k, v); }},
      {"c", [](auto& c, auto& k, auto& v) { c.c = parse_double(k, v); }},
      {"lambda_min", [](auto& c, auto& k, auto& v) { c.lambda_min = parse_double(k, v); }},
      {"lambda_max", [](auto& c, auto& k, auto& v) { c.lambda_max = parse_double(k, v); }},
      {"lambda_step", [](auto& c, auto& k, auto& v) { c.lambda_step = parse_double(k, v); }},
      {"admm_rho", [](auto& c, auto& k, auto& v) { c.admm.rho = parse_double(k, v); }},
      {"admm_max_iters", [](auto& c, auto& k, auto& v) { c.admm.max_iters = static_cast<int>(parse_unsigned(k, v)); }},
      {"admm_tol_primal", [](auto& c, auto& k, auto& v) { c.admm.tol_primal = parse_double(k, v); }},
      {"admm_tol_dual", [](auto& c, auto& k, auto& v) { c.admm.tol_dual = parse_double(k, v); }},
      {"use_transform", [](auto& c, auto& k, auto& v) { c.use_transform = parse_bool(k, v); }},
      {"use_weights", [](auto& c, auto& k, auto& v) { c.use_weights = parse_bool(k, v); }},
      {"seed", [](auto& c, auto& k, auto& v) { c.seed = parse_unsigned(k, v); }},
      {"s_floor", [](auto& c, auto& k, auto& v) { c.s_floor = parse_double(k, v); }},
      {"log_epsilon_factor", [](auto& c, auto& k, auto& v) { c.log_epsilon_factor = parse_double(k, v); }},
  };
  return table;
}

void apply_key(PipelineConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& [name, set] : setters()) {
    if (name == key) {
      set(cfg, key, value);
      return;
    }
  }
  throw ParameterError("unknown config key '" + key + "'");
}

std::string json_scalar_text(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_float()) return fmt_double(v.get<double>());
  throw ParameterError("manifest config holds a non-scalar value");
}

}  // namespace

void PipelineConfig::validate() const {
  if (patch_size < 2) throw ParameterError("patch_size must be >= 2");
  if (stack_count < 1) throw ParameterError("stack_count must be >= 1");
  if (stride < 1) throw ParameterError("stride must be >= 1");
  if (search_window < patch_size) throw ParameterError("search_window must be >= patch_size");
  if (!(c >= 0.0) || !std::isfinite(c)) throw ParameterError("c must be finite and >= 0");
  if (!(lambda_step > 0.0) || !(lambda_max >= lambda_min)) throw ParameterError("invalid lambda grid");
  if (!(admm.rho > 0.0)) throw ParameterError("admm_rho must be > 0");
  if (admm.max_iters < 1) throw ParameterError("admm_max_iters must be >= 1");
  if (!(admm.tol_primal > 0.0) || !(admm.tol_dual > 0.0)) throw ParameterError("ADMM tolerances must be > 0");
  if (!(s_floor > 0.0)) throw ParameterError("s_floor must be > 0");
  if (!(log_epsilon_factor > 0.0)) throw ParameterError("log_epsilon_factor must be > 0");
}

PipelineConfig parse_config(std::istream& in, PipelineConfig base) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParameterError("config line " + std::to_string(line_no) + ": expected `key = value`");
    }
    apply_key(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return base;
}

PipelineConfig load_config(const std::string& path, PipelineConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    Json doc;
    try {
      doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
      throw IoError("manifest " + path + ": " + e.what(), e.byte);
    }
    if (!doc.contains("config") || !doc["config"].is_object()) {
      throw ParameterError("manifest " + path + " has no config object");
    }
    for (const auto& [key, value] : doc["config"].items()) apply_key(base, key, json_scalar_text(value));
    return base;
  }
  std::istringstream text_in(text);
  return parse_config(text_in, base);
}

std::string config_to_text(const PipelineConfig& cfg) {
  std::ostringstream out;
  out << "patch_size = " << cfg.patch_size << "\n"
      << "stack_count = " << cfg.stack_count << "\n"
      << "stride = " << cfg.stride << "\n"
      << "search_window = " << cfg.search_window << "\n"
      << "c = " << fmt_double(cfg.c) << "\n"
      << "lambda_min = " << fmt_double(cfg.lambda_min) << "\n"
      << "lambda_max = " << fmt_double(cfg.lambda_max) << "\n"
      << "lambda_step = " << fmt_double(cfg.lambda_step) << "\n"
      << "admm_rho = " << fmt_double(cfg.admm.rho) << "\n"
      << "admm_max_iters = " << cfg.admm.max_iters << "\n"
      << "admm_tol_primal = " << fmt_double(cfg.admm.tol_primal) << "\n"
      << "admm_tol_dual = " << fmt_double(cfg.admm.tol_dual) << "\n"
      << "use_transform = " << (cfg.use_transform ? "true" : "false") << "\n"
      << "use_weights = " << (cfg.use_weights ? "true" : "false") << "\n"
      << "seed = " << cfg.seed << "\n"
      << "s_floor = " << fmt_double(cfg.s_floor) << "\n"
      << "log_epsilon_factor = " << fmt_double(cfg.log_epsilon_factor) << "\n";
  return out.str();
}

}  // namespace despeckle
