#include "acan/run_config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "acan/errors.hpp"
#include "acan/guidance.hpp"

namespace acan {

namespace {

using nlohmann::json;

void read(const json& j, const char* key, bool& out) {
  if (!j.contains(key)) return;
  if (!j[key].is_boolean()) throw ConfigError(std::string("'") + key + "' must be true or false");
  out = j[key].get<bool>();
}

void read(const json& j, const char* key, int64_t& out) {
  if (!j.contains(key)) return;
  if (!j[key].is_number_integer()) throw ConfigError(std::string("'") + key + "' must be an integer");
  out = j[key].get<int64_t>();
}

void read(const json& j, const char* key, std::uint64_t& out) {
  if (!j.contains(key)) return;
  if (!j[key].is_number_unsigned()) {
    throw ConfigError(std::string("'") + key + "' must be a non-negative integer");
  }
  out = j[key].get<std::uint64_t>();
}

void read(const json& j, const char* key, double& out) {
  if (!j.contains(key)) return;
  if (!j[key].is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
  out = j[key].get<double>();
}

void read(const json& j, const char* key, std::string& out) {
  if (!j.contains(key)) return;
  if (!j[key].is_string()) throw ConfigError(std::string("'") + key + "' must be a string");
  out = j[key].get<std::string>();
}

void read(const json& j, const char* key, std::map<std::string, double>& out) {
  if (!j.contains(key)) return;
  if (!j[key].is_object()) throw ConfigError(std::string("'") + key + "' must be an object");
  out.clear();
  for (const auto& [name, value] : j[key].items()) {
    if (!value.is_number()) throw ConfigError(std::string("'") + key + "." + name + "' must be a number");
    out[name] = value.get<double>();
  }
}

// Field list shared by to_json and from_json.
template <typename Config, typename F>
void visit_fields(Config& c, F&& f) {
  f("seed", c.seed);
  f("preset", c.preset);
  f("image_size", c.image_size);
  f("epochs", c.epochs);
  f("batch_size", c.batch_size);
  f("acan_learning_rate", c.acan_learning_rate);
  f("weight_decay", c.weight_decay);
  f("augment", c.augment);
  f("cosine_schedule", c.cosine_schedule);
  f("gan_learning_rate", c.gan_learning_rate);
  f("beta1", c.beta1);
  f("beta2", c.beta2);
  f("adversarial_weight", c.adversarial_weight);
  f("cycle_weight", c.cycle_weight);
  f("identity_weight", c.identity_weight);
  f("attribute_weights", c.attribute_weights);
  f("direction", c.direction);
  f("generator_width", c.generator_width);
  f("generator_blocks", c.generator_blocks);
  f("generator_downsamplings", c.generator_downsamplings);
  f("discriminator_width", c.discriminator_width);
  f("discriminator_layers", c.discriminator_layers);
  f("pool_capacity", c.pool_capacity);
  f("grid_every", c.grid_every);
  f("probe_size", c.probe_size);
  f("dataset", c.dataset);
  f("target_path", c.target_path);
  f("acan_checkpoint", c.acan_checkpoint);
  f("output_dir", c.output_dir);
}

json parse_override(const std::string& key, const json& like, const std::string& text) {
  auto bad = [&] { return ConfigError("invalid value '" + text + "' for --" + key); };
  if (like.is_boolean()) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw bad();
  }
  if (like.is_number_integer()) {
    if (like.is_number_unsigned()) {
      std::uint64_t v = 0;
      const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
      if (r.ec != std::errc() || r.ptr != text.data() + text.size()) throw bad();
      return v;
    }
    int64_t v = 0;
    const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
    if (r.ec != std::errc() || r.ptr != text.data() + text.size()) throw bad();
    return v;
  }
  if (like.is_number()) {
    double v = 0;
    const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
    if (r.ec != std::errc() || r.ptr != text.data() + text.size()) throw bad();
    return v;
  }
  if (like.is_object()) {
    // name=weight pairs separated by commas
    json out = json::object();
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw bad();
      double v = 0;
      const auto value = item.substr(eq + 1);
      const auto r = std::from_chars(value.data(), value.data() + value.size(), v);
      if (r.ec != std::errc() || r.ptr != value.data() + value.size()) throw bad();
      out[item.substr(0, eq)] = v;
    }
    return out;
  }
  return text;
}

}  // namespace

void RunConfig::validate() const {
  if (preset != "toy" && preset != "paper") throw ConfigError("preset must be 'toy' or 'paper'");
  if (image_size <= 0) throw ConfigError("image_size must be positive");
  if (epochs <= 0) throw ConfigError("epochs must be positive");
  if (batch_size <= 0) throw ConfigError("batch_size must be positive");
  if (grid_every <= 0) throw ConfigError("grid_every must be positive");
  if (probe_size <= 0) throw ConfigError("probe_size must be positive");
  (void)guidance_direction_from_string(direction);
  for (const auto& [name, w] : attribute_weights) {
    if (!AttributeSchema::canonical().index_of(name)) throw ConfigError("unknown attribute '" + name + "'");
    if (!std::isfinite(w) || w < 0.0) throw ConfigError("attribute weight for '" + name + "' must be >= 0");
  }
  backbone().validate();
  acan_training().validate();
  gan_training().validate();
}

json RunConfig::to_json() const {
  json j = json::object();
  visit_fields(*this, [&](const char* key, const auto& value) { j[key] = value; });
  return j;
}

RunConfig RunConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("run configuration must be a JSON object");
  std::set<std::string> known;
  RunConfig c;
  visit_fields(c, [&](const char* key, auto& value) {
    known.insert(key);
    read(j, key, value);
  });
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown configuration key '" + key + "'");
  }
  c.validate();
  return c;
}

std::string RunConfig::dump() const { return to_json().dump(2) + "\n"; }

RunConfig RunConfig::parse(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
  return from_json(j);
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

void RunConfig::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write configuration " + path);
  out << dump();
}

BackboneConfig RunConfig::backbone() const {
  return preset == "paper" ? BackboneConfig::paper(image_size) : BackboneConfig::toy(image_size);
}

AcanTrainConfig RunConfig::acan_training() const {
  AcanTrainConfig c;
  c.epochs = epochs;
  c.batch_size = batch_size;
  c.learning_rate = acan_learning_rate;
  c.weight_decay = weight_decay;
  c.augment = augment;
  c.cosine_schedule = cosine_schedule;
  c.seed = seed;
  return c;
}

GanTrainConfig RunConfig::gan_training() const {
  GanTrainConfig c;
  c.net.image_size = image_size;
  c.net.generator_width = generator_width;
  c.net.generator_blocks = generator_blocks;
  c.net.generator_downsamplings = generator_downsamplings;
  c.net.discriminator_width = discriminator_width;
  c.net.discriminator_layers = discriminator_layers;
  c.weights = {adversarial_weight, cycle_weight, identity_weight};
  c.learning_rate = gan_learning_rate;
  c.beta1 = beta1;
  c.beta2 = beta2;
  c.pool_capacity = pool_capacity;
  c.seed = seed;
  return c;
}

RunConfig resolve_run_config(const std::optional<std::string>& path,
                             const std::map<std::string, std::string>& overrides) {
  const json defaults = RunConfig{}.to_json();
  json merged = path ? RunConfig::load(*path).to_json() : defaults;
  for (const auto& [key, text] : overrides) {
    if (!defaults.contains(key)) throw ConfigError("unknown option --" + key);
    merged[key] = parse_override(key, defaults[key], text);
  }
  return RunConfig::from_json(merged);
}

}  // namespace acan
