#include "theo/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace theo {

using nlohmann::json;

json json_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double number_from_json(const json& v, const std::string& field) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "+inf" || s == "infinity") return kInfinity;
    if (s == "-inf") return -kInfinity;
  }
  throw ConfigError("field '" + field + "' must be a number or \"inf\"");
}

HyperParams OptimizerConfig::hyper_params() const {
  HyperParams hp;
  hp.step_size = lr;
  hp.inverse_temperature = inverse_temperature;
  hp.boost_floor = boost_floor;
  hp.reg_strength = reg_strength;
  hp.reg_exponent = reg_exponent;
  return hp;
}

json ExperimentConfig::to_json() const {
  json mlp = {{"layers", problem.mlp.layers},
              {"activation", to_string(problem.mlp.activation)},
              {"dataset_size", problem.mlp.dataset_size},
              {"label_noise", problem.mlp.label_noise},
              {"batch_size", problem.mlp.batch_size},
              {"teacher_scale", problem.mlp.teacher_scale},
              {"seed", problem.mlp.seed}};
  return json{
      {"label", label},
      {"problem", {{"name", problem.name},
                   {"curvature", problem.curvature},
                   {"dimension", problem.dimension},
                   {"mlp", mlp}}},
      {"optimizer", {{"name", optimizer.name},
                     {"lr", optimizer.lr},
                     {"boost_floor", json_number(optimizer.boost_floor)},
                     {"inverse_temperature", json_number(optimizer.inverse_temperature)},
                     {"reg_strength", optimizer.reg_strength},
                     {"reg_exponent", optimizer.reg_exponent},
                     {"beta1", optimizer.beta1},
                     {"beta2", optimizer.beta2},
                     {"eps", optimizer.eps},
                     {"bias_correction", optimizer.bias_correction},
                     {"momentum", optimizer.momentum},
                     {"alpha", optimizer.alpha}}},
      {"init", {{"kind", init.kind},
                {"value", init.value},
                {"scale", init.scale},
                {"low", init.low},
                {"high", init.high}}},
      {"seed", seed},
      {"steps", steps},
      {"chains", chains},
      {"record_every", record_every},
      {"averaging", {{"enabled", averaging.enabled},
                     {"patience", averaging.patience},
                     {"min_delta", averaging.min_delta},
                     {"epoch_length", averaging.epoch_length},
                     {"noise_during_averaging", averaging.noise_during_averaging}}},
      {"clip", clip ? json(*clip) : json(nullptr)},
      {"rate", {{"step_sizes", rate.step_sizes},
                {"diffusion_time", rate.diffusion_time},
                {"lo", rate.lo},
                {"hi", rate.hi},
                {"grid", rate.grid},
                {"init_from_oracle", rate.init_from_oracle}}},
      {"out_dir", out_dir},
      {"threads", threads}};
}

namespace {

// Overlays `patch` on `base`, rejecting keys that `base` does not have.
void overlay(json& base, const json& patch, const std::string& prefix) {
  if (!patch.is_object()) throw ConfigError("config section '" + prefix + "' must be an object");
  for (const auto& [key, value] : patch.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!base.contains(key)) throw ConfigError("unknown config field '" + path + "'");
    if (base[key].is_object() && value.is_object()) {
      overlay(base[key], value, path);
    } else {
      base[key] = value;
    }
  }
}

template <typename T>
T get(const json& doc, const char* key, const std::string& section) {
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("field '" + section + key + "': " + e.what());
  }
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& doc) {
  json merged = ExperimentConfig{}.to_json();
  overlay(merged, doc, "");

  ExperimentConfig c;
  c.label = get<std::string>(merged, "label", "");
  const json& p = merged["problem"];
  c.problem.name = get<std::string>(p, "name", "problem.");
  c.problem.curvature = get<double>(p, "curvature", "problem.");
  c.problem.dimension = get<std::size_t>(p, "dimension", "problem.");
  const json& m = p["mlp"];
  c.problem.mlp.layers = get<std::vector<std::size_t>>(m, "layers", "problem.mlp.");
  try {
    c.problem.mlp.activation = parse_activation(get<std::string>(m, "activation", "problem.mlp."));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  c.problem.mlp.dataset_size = get<std::size_t>(m, "dataset_size", "problem.mlp.");
  c.problem.mlp.label_noise = get<double>(m, "label_noise", "problem.mlp.");
  c.problem.mlp.batch_size = get<std::size_t>(m, "batch_size", "problem.mlp.");
  c.problem.mlp.teacher_scale = get<double>(m, "teacher_scale", "problem.mlp.");
  c.problem.mlp.seed = get<std::uint64_t>(m, "seed", "problem.mlp.");

  const json& o = merged["optimizer"];
  c.optimizer.name = get<std::string>(o, "name", "optimizer.");
  c.optimizer.lr = get<double>(o, "lr", "optimizer.");
  c.optimizer.boost_floor = number_from_json(o["boost_floor"], "optimizer.boost_floor");
  c.optimizer.inverse_temperature =
      number_from_json(o["inverse_temperature"], "optimizer.inverse_temperature");
  c.optimizer.reg_strength = get<double>(o, "reg_strength", "optimizer.");
  c.optimizer.reg_exponent = get<int>(o, "reg_exponent", "optimizer.");
  c.optimizer.beta1 = get<double>(o, "beta1", "optimizer.");
  c.optimizer.beta2 = get<double>(o, "beta2", "optimizer.");
  c.optimizer.eps = get<double>(o, "eps", "optimizer.");
  c.optimizer.bias_correction = get<bool>(o, "bias_correction", "optimizer.");
  c.optimizer.momentum = get<double>(o, "momentum", "optimizer.");
  c.optimizer.alpha = get<double>(o, "alpha", "optimizer.");

  const json& i = merged["init"];
  c.init.kind = get<std::string>(i, "kind", "init.");
  c.init.value = i["value"].is_array() ? get<ParamVector>(i, "value", "init.")
                                       : ParamVector{get<double>(i, "value", "init.")};
  c.init.scale = get<double>(i, "scale", "init.");
  c.init.low = get<double>(i, "low", "init.");
  c.init.high = get<double>(i, "high", "init.");

  c.seed = get<std::uint64_t>(merged, "seed", "");
  c.steps = get<std::int64_t>(merged, "steps", "");
  c.chains = get<std::size_t>(merged, "chains", "");
  c.record_every = get<std::int64_t>(merged, "record_every", "");

  const json& a = merged["averaging"];
  c.averaging.enabled = get<bool>(a, "enabled", "averaging.");
  c.averaging.patience = get<int>(a, "patience", "averaging.");
  c.averaging.min_delta = get<double>(a, "min_delta", "averaging.");
  c.averaging.epoch_length = get<std::int64_t>(a, "epoch_length", "averaging.");
  c.averaging.noise_during_averaging = get<bool>(a, "noise_during_averaging", "averaging.");

  if (!merged["clip"].is_null()) c.clip = get<double>(merged, "clip", "");

  const json& r = merged["rate"];
  c.rate.step_sizes = get<std::vector<double>>(r, "step_sizes", "rate.");
  c.rate.diffusion_time = get<double>(r, "diffusion_time", "rate.");
  c.rate.lo = get<double>(r, "lo", "rate.");
  c.rate.hi = get<double>(r, "hi", "rate.");
  c.rate.grid = get<std::size_t>(r, "grid", "rate.");
  c.rate.init_from_oracle = get<bool>(r, "init_from_oracle", "rate.");

  c.out_dir = get<std::string>(merged, "out_dir", "");
  c.threads = get<unsigned>(merged, "threads", "");
  c.validate();
  return c;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (problem.name != "motivating" && problem.name != "quadratic" && problem.name != "mlp")
    fail("unknown problem '" + problem.name + "'");
  const std::string& o = optimizer.name;
  if (o != "theo_poula" && o != "sgd" && o != "adam" && o != "amsgrad" && o != "rmsprop")
    fail("unknown optimizer '" + o + "'");
  if (!(optimizer.lr > 0.0) || !std::isfinite(optimizer.lr)) fail("optimizer.lr must be finite and > 0");
  if (o == "theo_poula") {
    try {
      optimizer.hyper_params().validate();
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
  }
  auto unit = [&](double v, const char* name) {
    if (!(v >= 0.0 && v < 1.0)) fail(std::string(name) + " must lie in [0, 1)");
  };
  unit(optimizer.beta1, "optimizer.beta1");
  unit(optimizer.beta2, "optimizer.beta2");
  unit(optimizer.momentum, "optimizer.momentum");
  unit(optimizer.alpha, "optimizer.alpha");
  if (!(optimizer.eps >= 0.0)) fail("optimizer.eps must be >= 0");
  if (init.kind != "explicit" && init.kind != "gaussian" && init.kind != "uniform")
    fail("unknown init.kind '" + init.kind + "'");
  if (init.kind == "explicit" && init.value.empty()) fail("init.value must not be empty");
  if (init.kind == "uniform" && !(init.low < init.high)) fail("init.low must be < init.high");
  if (init.kind == "gaussian" && !(init.scale >= 0.0)) fail("init.scale must be >= 0");
  if (steps < 0) fail("steps must be >= 0");
  if (chains < 1) fail("chains must be >= 1");
  if (record_every < 1) fail("record_every must be >= 1");
  if (averaging.patience < 1) fail("averaging.patience must be >= 1");
  if (averaging.epoch_length < 1) fail("averaging.epoch_length must be >= 1");
  if (!(averaging.min_delta >= 0.0)) fail("averaging.min_delta must be >= 0");
  if (clip && !(*clip > 0.0)) fail("clip must be > 0");
  if (rate.diffusion_time <= 0.0) fail("rate.diffusion_time must be > 0");
  for (double s : rate.step_sizes)
    if (!(s > 0.0)) fail("rate.step_sizes entries must be > 0");
}

std::string ExperimentConfig::hash() const {
  json doc = to_json();
  doc.erase("out_dir");
  doc.erase("threads");
  const std::string text = doc.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void set_path(json& doc, const std::string& path, const json& value) {
  json* node = &doc;
  std::stringstream parts(path);
  std::string key;
  std::vector<std::string> keys;
  while (std::getline(parts, key, '.')) keys.push_back(key);
  if (keys.empty()) throw ConfigError("empty config path");
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (!node->is_object() || !node->contains(keys[i]))
      throw ConfigError("unknown config field '" + path + "'");
    node = &(*node)[keys[i]];
  }
  *node = value;
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + assignment + "' must look like path=value");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) value = text;
  json canonical = ExperimentConfig{}.to_json();
  overlay(canonical, doc, "");
  set_path(canonical, path, value);
  doc = std::move(canonical);
}

ExperimentConfig load_config(const std::string& file,
                             const std::vector<std::string>& overrides) {
  json doc = json::object();
  if (!file.empty()) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open config file '" + file + "'");
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("config file '" + file + "': " + e.what());
    }
  }
  for (const auto& o : overrides) apply_override(doc, o);
  return ExperimentConfig::from_json(doc);
}

}  // namespace theo
