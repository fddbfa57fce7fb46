#include "specrob/config.hpp"

#include <fstream>
#include <map>
#include <set>

#include "specrob/corruptions.hpp"
#include "specrob/report.hpp"

namespace specrob {

using nlohmann::json;

namespace {

// Object view that records which keys were read and rejects the rest.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  [[noreturn]] static void fail(const std::string& path, const std::string& what) {
    throw ConfigError("config " + (path.empty() ? std::string("<root>") : path) + ": " + what);
  }

  void allow(std::initializer_list<const char*> keys) {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, v] : j_.items())
      if (!ok.count(k)) fail(sub(k), "unknown key");
  }

  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  const json& at(const char* key) const { return j_.at(key); }
  std::string sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  double number(const char* key, double def, double lo = -1e300, double hi = 1e300) const {
    if (!has(key)) return def;
    if (!at(key).is_number()) fail(sub(key), "expected a number");
    const double v = at(key).get<double>();
    if (v < lo || v > hi) fail(sub(key), "value out of range");
    return v;
  }
  std::size_t count(const char* key, std::size_t def, std::size_t lo = 0) const {
    if (!has(key)) return def;
    if (!at(key).is_number_unsigned()) fail(sub(key), "expected a non-negative integer");
    const auto v = at(key).get<std::size_t>();
    if (v < lo) fail(sub(key), "value must be at least " + std::to_string(lo));
    return v;
  }
  bool flag(const char* key, bool def) const {
    if (!has(key)) return def;
    if (!at(key).is_boolean()) fail(sub(key), "expected true or false");
    return at(key).get<bool>();
  }
  std::string text(const char* key, const std::string& def) const {
    if (!has(key)) return def;
    if (!at(key).is_string()) fail(sub(key), "expected a string");
    return at(key).get<std::string>();
  }
  std::string required_text(const char* key) const {
    if (!has(key)) fail(sub(key), "missing");
    return text(key, "");
  }
  template <class T>
  std::vector<T> list(const char* key, std::vector<T> def) const {
    if (!has(key)) return def;
    if (!at(key).is_array()) fail(sub(key), "expected an array");
    try {
      return at(key).get<std::vector<T>>();
    } catch (const json::exception&) {
      fail(sub(key), "array has entries of the wrong type");
    }
  }

 private:
  const json& j_;
  std::string path_;
};

FilterSpec parse_filter(const Obj& o, const std::string& path) {
  try {
    return FilterSpec{parse_filter_mode(o.required_text("mode")), o.count("bandwidth", 0, 1)};
  } catch (const std::invalid_argument& e) {
    Obj::fail(path, e.what());
  }
}

void parse_model(const json& j, TrainConfig& t) {
  Obj o(j, "model");
  o.allow({"arch", "conv1_channels", "conv2_channels", "hidden", "input_offset", "front_end"});
  try {
    t.arch.kind = parse_arch(o.text("arch", "smallconv"));
  } catch (const std::invalid_argument& e) {
    Obj::fail("model.arch", e.what());
  }
  t.arch.conv1_channels = o.count("conv1_channels", t.arch.conv1_channels, 1);
  t.arch.conv2_channels = o.count("conv2_channels", t.arch.conv2_channels, 1);
  t.arch.hidden = o.count("hidden", t.arch.hidden, 1);
  t.arch.input_offset = o.number("input_offset", t.arch.input_offset);
  if (o.has("front_end")) {
    Obj f(o.at("front_end"), "model.front_end");
    f.allow({"mode", "bandwidth"});
    t.front_end = parse_filter(f, "model.front_end");
  }
}

PgdConfig parse_pgd(const Obj& o, PgdConfig p) {
  p.epsilon = o.number("epsilon", p.epsilon, 0.0, 1.0);
  p.step_size = o.number("step_size", p.step_size, 0.0);
  p.steps = o.count("steps", p.steps);
  p.random_init = o.flag("random_init", p.random_init);
  return p;
}

AugStage parse_stage(const json& j, const std::string& path, std::size_t index, ExperimentConfig& cfg) {
  Obj o(j, path);
  const std::string type = o.required_text("type");
  if (type == "flip_crop") {
    o.allow({"type", "pad"});
    return FlipCropStage{o.count("pad", 2)};
  }
  if (type == "gaussian") {
    o.allow({"type", "sigma", "per_image_sigma"});
    return GaussianStage{o.number("sigma", 0.1, 0.0), o.flag("per_image_sigma", false)};
  }
  if (type == "band_limited") {
    o.allow({"type", "mode", "bandwidth", "norm"});
    return BandLimitedStage{parse_filter(o, path), o.number("norm", 8.0, 0.0)};
  }
  if (type == "matched") {
    o.allow({"type", "template", "corruption", "severity"});
    if (o.has("template") == o.has("corruption")) Obj::fail(path, "give exactly one of template or corruption");
    if (o.has("template")) {
      try {
        return MatchedStage{read_template_csv(o.text("template", ""))};
      } catch (const std::runtime_error& e) {
        Obj::fail(o.sub("template"), e.what());
      }
    }
    PendingTemplate p{index, o.text("corruption", ""), static_cast<int>(o.count("severity", 3, 1))};
    try {
      corruption_info(p.corruption);
    } catch (const std::invalid_argument& e) {
      Obj::fail(o.sub("corruption"), e.what());
    }
    if (p.severity > 5) Obj::fail(o.sub("severity"), "severity must be 1..5");
    cfg.pending_templates.push_back(p);
    return MatchedStage{};
  }
  if (type == "corruption_set") {
    o.allow({"type", "names", "exclude", "severities", "clean_fraction"});
    CorruptionSetStage s;
    std::vector<std::string> names;
    for (const auto& c : corruption_suite()) names.emplace_back(c.name);
    s.names = o.list<std::string>("names", names);
    const auto exclude = o.list<std::string>("exclude", {});
    for (const auto& e : exclude) std::erase(s.names, e);
    for (const auto& n : s.names) {
      try {
        corruption_info(n);
      } catch (const std::invalid_argument& e) {
        Obj::fail(o.sub("names"), e.what());
      }
    }
    if (s.names.empty()) Obj::fail(path, "no corruptions left");
    s.severities = o.list<int>("severities", s.severities);
    for (int v : s.severities)
      if (v < 1 || v > 5) Obj::fail(o.sub("severities"), "severity must be 1..5");
    s.clean_fraction = o.number("clean_fraction", 0.0, 0.0, 1.0);
    return s;
  }
  if (type == "adversarial") {
    o.allow({"type", "epsilon", "step_size", "steps", "random_init"});
    return AdversarialStage{parse_pgd(o, AdversarialStage{}.pgd)};
  }
  Obj::fail(o.sub("type"), "unknown stage '" + type + "'");
}

void parse_train(const json& j, ExperimentConfig& cfg) {
  Obj o(j, "train");
  o.allow({"epochs", "batch_size", "learning_rate", "momentum", "weight_decay", "decay_epochs", "lr_decay", "pipeline"});
  TrainConfig& t = cfg.train;
  t.epochs = o.count("epochs", t.epochs, 1);
  t.batch_size = o.count("batch_size", t.batch_size, 1);
  t.learning_rate = o.number("learning_rate", t.learning_rate);
  if (!(t.learning_rate > 0.0)) Obj::fail("train.learning_rate", "must be positive");
  t.momentum = o.number("momentum", t.momentum, 0.0, 1.0);
  t.weight_decay = o.number("weight_decay", t.weight_decay, 0.0);
  t.decay_epochs = o.list<std::size_t>("decay_epochs", t.decay_epochs);
  t.lr_decay = o.number("lr_decay", t.lr_decay, 0.0);
  if (o.has("pipeline")) {
    if (!o.at("pipeline").is_array()) Obj::fail("train.pipeline", "expected an array");
    t.pipeline.clear();
    for (std::size_t i = 0; i < o.at("pipeline").size(); ++i)
      t.pipeline.push_back(parse_stage(o.at("pipeline")[i], "train.pipeline[" + std::to_string(i) + "]", i, cfg));
  }
}

const std::map<std::string, std::set<std::string>>& analysis_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"heatmap", {"type", "norm", "layer", "window", "clip", "images", "mirror", "repeats", "sign"}},
      {"spectrum", {"type", "corruption", "severity", "images"}},
      {"evaluate", {"type", "corruptions", "severities", "images", "baseline"}},
      {"attack_pgd", {"type", "epsilon", "step_size", "steps", "random_init", "images", "include_misclassified"}},
  };
  return keys;
}

}  // namespace

ExperimentConfig parse_experiment_config(const json& doc) {
  ExperimentConfig cfg;
  cfg.source = doc;
  Obj root(doc, "");
  root.allow({"seed", "output_dir", "dataset", "model", "train", "analyses"});
  if (root.has("seed")) {
    if (!doc.at("seed").is_number_unsigned()) Obj::fail("seed", "expected a non-negative integer");
    cfg.seed = doc.at("seed").get<std::uint64_t>();
  }
  cfg.train.seed = cfg.seed;
  cfg.output_dir = root.text("output_dir", cfg.output_dir.string());

  if (!root.has("dataset")) Obj::fail("dataset", "missing");
  Obj ds(doc.at("dataset"), "dataset");
  ds.allow({"train", "test", "train_limit", "test_limit"});
  cfg.train_data = ds.required_text("train");
  if (ds.has("test")) cfg.test_data = ds.text("test", "");
  cfg.train_limit = ds.count("train_limit", 0);
  cfg.test_limit = ds.count("test_limit", 0);

  if (root.has("model")) parse_model(doc.at("model"), cfg.train);
  if (root.has("train")) parse_train(doc.at("train"), cfg);

  if (root.has("analyses")) {
    if (!doc.at("analyses").is_array()) Obj::fail("analyses", "expected an array");
    for (std::size_t i = 0; i < doc.at("analyses").size(); ++i) {
      const std::string path = "analyses[" + std::to_string(i) + "]";
      Obj a(doc.at("analyses")[i], path);
      const std::string type = a.required_text("type");
      const auto it = analysis_keys().find(type);
      if (it == analysis_keys().end()) Obj::fail(a.sub("type"), "unknown analysis '" + type + "'");
      for (const auto& [k, v] : doc.at("analyses")[i].items())
        if (!it->second.count(k)) Obj::fail(a.sub(k), "unknown key");
      cfg.analyses.push_back({type, doc.at("analyses")[i]});
    }
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_experiment_config(doc);
}

std::uint64_t config_hash(const json& doc) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : doc.dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace specrob
