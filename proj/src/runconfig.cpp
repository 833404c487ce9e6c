#include "airlfd/runconfig.hpp"

#include <json.hpp>

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "airlfd/detector.hpp"
#include "airlfd/ioutil.hpp"
#include "airlfd/signalio.hpp"
#include "airlfd/synthrig.hpp"

namespace airlfd {

namespace {

using nlohmann::json;

enum class Kind { Int, Long, Real, Str, U64, IntList };

[[noreturn]] void type_error(const std::string& key, const char* expected) {
  fail(ErrorCode::TypeError, "key '" + key + "': expected " + expected);
}

int as_int(const json& v, const std::string& key) {
  if (!v.is_number_integer()) type_error(key, "integer");
  return v.get<int>();
}

long as_long(const json& v, const std::string& key) {
  if (!v.is_number_integer()) type_error(key, "integer");
  return v.get<long>();
}

double as_real(const json& v, const std::string& key) {
  if (!v.is_number()) type_error(key, "real");
  return v.get<double>();
}

std::string as_str(const json& v, const std::string& key) {
  if (!v.is_string()) type_error(key, "string");
  return v.get<std::string>();
}

std::uint64_t as_u64(const json& v, const std::string& key) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0)
    return static_cast<std::uint64_t>(v.get<long long>());
  type_error(key, "nonnegative integer");
}

std::vector<int> as_int_list(const json& v, const std::string& key) {
  if (!v.is_array()) type_error(key, "array of integers");
  std::vector<int> out;
  for (const auto& e : v) out.push_back(as_int(e, key));
  return out;
}

struct KeyDef {
  const char* name;
  Kind kind;
  void (*set)(RunConfig&, const json&, const std::string&);
  json (*get)(const RunConfig&);
};

#define FIELD(key, kind, member, cast)                                          \
  KeyDef{#key, kind,                                                            \
         [](RunConfig& c, const json& v, const std::string& k) {                \
           c.member = cast(v, k);                                               \
         },                                                                     \
         [](const RunConfig& c) { return json(c.member); }}

const KeyDef kKeys[] = {
    FIELD(n_files, Kind::Int, n_files, as_int),
    FIELD(samples_per_file, Kind::Int, samples_per_file, as_int),
    FIELD(onset_file, Kind::Int, onset_file, as_int),
    FIELD(regime, Kind::Str, regime, as_str),
    FIELD(ar_radius, Kind::Real, ar_radius, as_real),
    FIELD(ar_angle, Kind::Real, ar_angle, as_real),
    FIELD(noise_std, Kind::Real, noise_std, as_real),
    FIELD(win_len, Kind::Int, win_len, as_int),
    FIELD(stride, Kind::Int, stride, as_int),
    FIELD(mode, Kind::Str, mode, as_str),
    FIELD(total_steps, Kind::Long, total_steps, as_long),
    FIELD(batch_size, Kind::Int, batch_size, as_int),
    FIELD(disc_steps_per_round, Kind::Int, disc_steps_per_round, as_int),
    FIELD(gen_steps_per_round, Kind::Int, gen_steps_per_round, as_int),
    FIELD(gamma, Kind::Real, gamma, as_real),
    FIELD(lr_disc, Kind::Real, lr_disc, as_real),
    FIELD(lr_policy, Kind::Real, lr_policy, as_real),
    FIELD(logit_clamp, Kind::Real, logit_clamp, as_real),
    FIELD(log_std_init, Kind::Real, log_std_init, as_real),
    FIELD(policy_hidden, Kind::IntList, policy_hidden, as_int_list),
    FIELD(reward_hidden, Kind::IntList, reward_hidden, as_int_list),
    FIELD(value_hidden, Kind::IntList, value_hidden, as_int_list),
    FIELD(iforest_psi, Kind::Int, iforest_psi, as_int),
    FIELD(iforest_trees, Kind::Int, iforest_trees, as_int),
    FIELD(ae_steps, Kind::Int, ae_steps, as_int),
    FIELD(ae_batch_size, Kind::Int, ae_batch_size, as_int),
    FIELD(ae_hidden, Kind::Int, ae_hidden, as_int),
    FIELD(ae_latent, Kind::Int, ae_latent, as_int),
    FIELD(static_steps, Kind::Int, static_steps, as_int),
    FIELD(static_batch_size, Kind::Int, static_batch_size, as_int),
    FIELD(static_hidden, Kind::Int, static_hidden, as_int),
    FIELD(static_noise_dim, Kind::Int, static_noise_dim, as_int),
    FIELD(threshold_method, Kind::Str, threshold_method, as_str),
    FIELD(sigma_k, Kind::Real, sigma_k, as_real),
    FIELD(persistence, Kind::Int, persistence, as_int),
    FIELD(healthy_val_frac, Kind::Real, healthy_val_frac, as_real),
    FIELD(seed, Kind::U64, seed, as_u64),
    FIELD(model, Kind::Str, model, as_str),
    FIELD(out_dir, Kind::Str, out_dir, as_str),
    FIELD(manifest_path, Kind::Str, manifest_path, as_str),
    FIELD(model_path, Kind::Str, model_path, as_str),
};

#undef FIELD

const KeyDef* find_key(const std::string& name) {
  for (const KeyDef& def : kKeys)
    if (name == def.name) return &def;
  return nullptr;
}

void apply_json_key(RunConfig& cfg, const std::string& key, const json& value) {
  const KeyDef* def = find_key(key);
  if (!def) fail(ErrorCode::UnknownKey, "unknown key '" + key + "'");
  def->set(cfg, value, key);
}

json text_to_json(const KeyDef& def, const std::string& text, const std::string& key) {
  auto parse_int = [&](const std::string& s) -> long long {
    long long value = 0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    const auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc{} || res.ptr != end) type_error(key, "integer");
    return value;
  };
  switch (def.kind) {
    case Kind::Int:
    case Kind::Long:
      return json(parse_int(text));
    case Kind::U64: {
      const long long v = parse_int(text);
      if (v < 0) type_error(key, "nonnegative integer");
      return json(static_cast<std::uint64_t>(v));
    }
    case Kind::Real: {
      char* end = nullptr;
      const double v = std::strtod(text.c_str(), &end);
      if (end != text.c_str() + text.size() || text.empty()) type_error(key, "real");
      return json(v);
    }
    case Kind::Str:
      return json(text);
    case Kind::IntList: {
      json arr = json::array();
      std::size_t pos = 0;
      while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        arr.push_back(parse_int(text.substr(pos, comma - pos)));
        pos = comma + 1;
      }
      return arr;
    }
  }
  type_error(key, "value");
}

std::string env_name(const char* key) {
  std::string out = "AIRLFD_";
  for (const char* p = key; *p; ++p)
    out += static_cast<char>(std::toupper(static_cast<unsigned char>(*p)));
  return out;
}

void validate(const RunConfig& cfg) {
  if (cfg.model != "airl" && cfg.model != "iforest" && cfg.model != "ae" &&
      cfg.model != "static")
    fail(ErrorCode::BadConfig, "model must be one of airl, iforest, ae, static");
  detector::parse_threshold_method(cfg.threshold_method);
  synthrig::parse_regime(cfg.regime);
  signalio::FeatureMode::parse(cfg.mode);
  if (!(cfg.healthy_val_frac > 0.0 && cfg.healthy_val_frac < 1.0))
    fail(ErrorCode::BadConfig, "healthy_val_frac must be in (0,1)");
  if (cfg.out_dir.empty()) fail(ErrorCode::BadConfig, "out_dir must not be empty");
}

}  // namespace

std::string RunConfig::manifest_file() const {
  namespace fs = std::filesystem;
  return manifest_path.empty() ? (fs::path(out_dir) / "manifest.json").string() : manifest_path;
}

std::string RunConfig::model_file() const {
  namespace fs = std::filesystem;
  return model_path.empty() ? (fs::path(out_dir) / "model.json").string() : model_path;
}

std::string RunConfig::scores_file() const {
  namespace fs = std::filesystem;
  return (fs::path(out_dir) / ("scores_" + model + ".csv")).string();
}

std::string RunConfig::detect_file() const {
  namespace fs = std::filesystem;
  return (fs::path(out_dir) / ("detect_" + model + ".json")).string();
}

std::string RunConfig::report_file() const {
  namespace fs = std::filesystem;
  return (fs::path(out_dir) / ("report_" + model + ".json")).string();
}

std::string RunConfig::plot_file() const {
  namespace fs = std::filesystem;
  return (fs::path(out_dir) / ("plot_" + model + ".svg")).string();
}

std::string RunConfig::digest() const {
  json doc;
  for (const KeyDef& def : kKeys) doc[def.name] = def.get(*this);
  return hex64(fnv1a64(doc.dump()));
}

RunConfig parse_config(const std::string& config_path,
                       const std::vector<std::pair<std::string, std::string>>& overrides,
                       bool use_env) {
  RunConfig cfg;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) fail(ErrorCode::MissingFile, "cannot open config " + config_path);
    json doc;
    try {
      in >> doc;
    } catch (const json::exception& e) {
      fail(ErrorCode::ParseError, "config " + config_path + ": " + e.what());
    }
    if (!doc.is_object()) fail(ErrorCode::BadFormat, "config " + config_path + ": not an object");
    for (const auto& [key, value] : doc.items()) apply_json_key(cfg, key, value);
  }
  if (use_env) {
    for (const KeyDef& def : kKeys) {
      const char* value = std::getenv(env_name(def.name).c_str());
      if (value) apply_json_key(cfg, def.name, text_to_json(def, value, def.name));
    }
  }
  for (const auto& [key, value] : overrides) {
    const KeyDef* def = find_key(key);
    if (!def) fail(ErrorCode::UnknownKey, "unknown key '" + key + "'");
    apply_json_key(cfg, key, text_to_json(*def, value, key));
  }
  validate(cfg);
  return cfg;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const KeyDef& def : kKeys) out.emplace_back(def.name);
  return out;
}

}  // namespace airlfd
