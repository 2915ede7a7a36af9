#include "dsfusion/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace dsfusion {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

int64_t parse_int(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    const int64_t v = std::stoll(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: '" + key + "' expects an integer, got '" + value + "'");
  }
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: '" + key + "' expects a number, got '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on") return true;
  if (value == "false" || value == "0" || value == "off") return false;
  throw std::invalid_argument("config: '" + key + "' expects a boolean, got '" + value + "'");
}

std::array<int64_t, 4> parse_tap_layers(const std::string& key, const std::string& value) {
  std::array<int64_t, 4> taps{};
  std::stringstream ss(value);
  std::string item;
  size_t n = 0;
  while (std::getline(ss, item, ',')) {
    if (n >= taps.size()) throw std::invalid_argument("config: '" + key + "' expects 4 entries");
    taps[n++] = parse_int(key, trim(item));
  }
  if (n != taps.size()) throw std::invalid_argument("config: '" + key + "' expects 4 entries");
  return taps;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

void EncoderConfig::validate() const {
  if (image_size <= 0 || patch_size <= 0)
    throw std::invalid_argument("encoder: image_size and patch_size must be positive");
  if (image_size % patch_size != 0)
    throw std::invalid_argument("encoder: image_size must be divisible by patch_size");
  if (embed_dim <= 0 || num_heads <= 0 || embed_dim % num_heads != 0)
    throw std::invalid_argument("encoder: embed_dim must be divisible by num_heads");
  if (num_blocks <= 0) throw std::invalid_argument("encoder: num_blocks must be positive");
  if (mlp_ratio <= 0) throw std::invalid_argument("encoder: mlp_ratio must be positive");
  for (size_t i = 0; i < tap_layers.size(); ++i) {
    if (tap_layers[i] < 1 || tap_layers[i] > num_blocks)
      throw std::invalid_argument("encoder: tap_layers entries must lie in [1, num_blocks]");
    if (i > 0 && tap_layers[i] <= tap_layers[i - 1])
      throw std::invalid_argument("encoder: tap_layers must be strictly increasing");
  }
}

void DecoderConfig::validate() const {
  if (num_iterations < 1) throw std::invalid_argument("decoder: num_iterations must be >= 1");
  if (num_classes < 2) throw std::invalid_argument("decoder: num_classes must be >= 2");
}

void ModelConfig::validate() const {
  encoder.validate();
  decoder.validate();
  if (channels <= 0) throw std::invalid_argument("model: channels must be positive");
  if (fusion.reduction <= 0) throw std::invalid_argument("fusion: reduction must be positive");
  // Pyramid levels reach 1/32 of the input; each must stay integral.
  if (encoder.image_size % 32 != 0)
    throw std::invalid_argument("model: image_size must be divisible by 32");
}

void LossConfig::validate() const {
  if (w_d < 0 || w_g < 0 || w_n < 0 || alpha < 0 || beta < 0)
    throw std::invalid_argument("loss: weights must be nonnegative");
}

void TrainConfig::validate() const {
  if (learning_rate <= 0) throw std::invalid_argument("train: learning_rate must be positive");
  if (adam_beta1 < 0 || adam_beta1 >= 1 || adam_beta2 < 0 || adam_beta2 >= 1)
    throw std::invalid_argument("train: adam betas must lie in [0, 1)");
  if (batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
  if (epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  if (log_interval < 1) throw std::invalid_argument("train: log_interval must be >= 1");
  model.validate();
  loss.validate();
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> options;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                  " is not 'key = value': '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument("config: empty key on line " + std::to_string(lineno));
    options[key] = value;
  }
  return options;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

void apply_options(TrainConfig& cfg, const std::map<std::string, std::string>& options) {
  using Setter = std::function<void(TrainConfig&, const std::string&, const std::string&)>;
  static const std::map<std::string, Setter> setters = {
      {"learning_rate", [](TrainConfig& c, const std::string& k, const std::string& v) { c.learning_rate = parse_double(k, v); }},
      {"adam_beta1", [](TrainConfig& c, const std::string& k, const std::string& v) { c.adam_beta1 = parse_double(k, v); }},
      {"adam_beta2", [](TrainConfig& c, const std::string& k, const std::string& v) { c.adam_beta2 = parse_double(k, v); }},
      {"batch_size", [](TrainConfig& c, const std::string& k, const std::string& v) { c.batch_size = parse_int(k, v); }},
      {"epochs", [](TrainConfig& c, const std::string& k, const std::string& v) { c.epochs = parse_int(k, v); }},
      {"seed", [](TrainConfig& c, const std::string& k, const std::string& v) { c.seed = static_cast<uint64_t>(parse_int(k, v)); }},
      {"log_interval", [](TrainConfig& c, const std::string& k, const std::string& v) { c.log_interval = parse_int(k, v); }},
      {"deterministic", [](TrainConfig& c, const std::string& k, const std::string& v) { c.deterministic = parse_bool(k, v); }},
      {"data_dir", [](TrainConfig& c, const std::string&, const std::string& v) { c.data_dir = v; }},
      {"checkpoint_dir", [](TrainConfig& c, const std::string&, const std::string& v) { c.checkpoint_dir = v; }},
      {"channels", [](TrainConfig& c, const std::string& k, const std::string& v) { c.model.channels = parse_int(k, v); }},
      {"encoder.image_size", [](TrainConfig& c, const std::string& k, const std::string& v) { c.model.encoder.image_size = parse_int(k, v); }},
      {"encoder.patch_size", [](TrainConfig& c, const std::string& k, const std::string& v) { c.model.encoder.patch_size = parse_int(k, v); }},
      {"encoder.embed_dim", [](TrainConfig& c, const std::string& k, const std::string& v) { c.model.encoder.embed_dim = parse_int(k, v); }},
      {"encoder.num_blocks", [](TrainConfig& c, const std::string& k, const std::string& v) { c.model.encoder.num_blocks = parse_int(k, v); }},
      {"encoder.num_heads", [](TrainConfig& c, const std::string& k, const std::string& v) { c.model.encoder.num_heads = parse_int(k, v); }},
      {"encoder.mlp_ratio", [](TrainConfig& c, const std::string& k, const std::string& v) { c.model.encoder.mlp_ratio = parse_int(k, v); }},
      {"encoder.tap_layers", [](TrainConfig& c, const std::string& k, const std::string& v) { c.model.encoder.tap_layers = parse_tap_layers(k, v); }},
      {"fusion.enabled", [](TrainConfig& c, const std::string& k, const std::string& v) { c.model.fusion.enabled = parse_bool(k, v); }},
      {"fusion.reduction", [](TrainConfig& c, const std::string& k, const std::string& v) { c.model.fusion.reduction = parse_int(k, v); }},
      {"decoder.num_iterations", [](TrainConfig& c, const std::string& k, const std::string& v) { c.model.decoder.num_iterations = parse_int(k, v); }},
      {"decoder.num_classes", [](TrainConfig& c, const std::string& k, const std::string& v) { c.model.decoder.num_classes = parse_int(k, v); }},
      {"loss.w_d", [](TrainConfig& c, const std::string& k, const std::string& v) { c.loss.w_d = parse_double(k, v); }},
      {"loss.w_g", [](TrainConfig& c, const std::string& k, const std::string& v) { c.loss.w_g = parse_double(k, v); }},
      {"loss.w_n", [](TrainConfig& c, const std::string& k, const std::string& v) { c.loss.w_n = parse_double(k, v); }},
      {"loss.alpha", [](TrainConfig& c, const std::string& k, const std::string& v) { c.loss.alpha = parse_double(k, v); }},
      {"loss.beta", [](TrainConfig& c, const std::string& k, const std::string& v) { c.loss.beta = parse_double(k, v); }},
      {"loss.iteration_ramp", [](TrainConfig& c, const std::string& k, const std::string& v) { c.loss.iteration_ramp = parse_bool(k, v); }},
  };
  for (const auto& [key, value] : options) {
    const auto it = setters.find(key);
    if (it == setters.end()) throw std::invalid_argument("config: unknown key '" + key + "'");
    it->second(cfg, key, value);
  }
}

std::map<std::string, std::string> to_options(const TrainConfig& cfg) {
  std::map<std::string, std::string> o;
  o["learning_rate"] = format_double(cfg.learning_rate);
  o["adam_beta1"] = format_double(cfg.adam_beta1);
  o["adam_beta2"] = format_double(cfg.adam_beta2);
  o["batch_size"] = std::to_string(cfg.batch_size);
  o["epochs"] = std::to_string(cfg.epochs);
  o["seed"] = std::to_string(cfg.seed);
  o["log_interval"] = std::to_string(cfg.log_interval);
  o["deterministic"] = cfg.deterministic ? "true" : "false";
  o["data_dir"] = cfg.data_dir;
  o["checkpoint_dir"] = cfg.checkpoint_dir;
  o["channels"] = std::to_string(cfg.model.channels);
  o["encoder.image_size"] = std::to_string(cfg.model.encoder.image_size);
  o["encoder.patch_size"] = std::to_string(cfg.model.encoder.patch_size);
  o["encoder.embed_dim"] = std::to_string(cfg.model.encoder.embed_dim);
  o["encoder.num_blocks"] = std::to_string(cfg.model.encoder.num_blocks);
  o["encoder.num_heads"] = std::to_string(cfg.model.encoder.num_heads);
  o["encoder.mlp_ratio"] = std::to_string(cfg.model.encoder.mlp_ratio);
  {
    std::string taps;
    for (size_t i = 0; i < cfg.model.encoder.tap_layers.size(); ++i) {
      if (i) taps += ",";
      taps += std::to_string(cfg.model.encoder.tap_layers[i]);
    }
    o["encoder.tap_layers"] = taps;
  }
  o["fusion.enabled"] = cfg.model.fusion.enabled ? "true" : "false";
  o["fusion.reduction"] = std::to_string(cfg.model.fusion.reduction);
  o["decoder.num_iterations"] = std::to_string(cfg.model.decoder.num_iterations);
  o["decoder.num_classes"] = std::to_string(cfg.model.decoder.num_classes);
  o["loss.w_d"] = format_double(cfg.loss.w_d);
  o["loss.w_g"] = format_double(cfg.loss.w_g);
  o["loss.w_n"] = format_double(cfg.loss.w_n);
  o["loss.alpha"] = format_double(cfg.loss.alpha);
  o["loss.beta"] = format_double(cfg.loss.beta);
  o["loss.iteration_ramp"] = cfg.loss.iteration_ramp ? "true" : "false";
  return o;
}

TrainConfig load_train_config(const std::string& config_path,
                              const std::vector<std::string>& overrides) {
  TrainConfig cfg;
  if (!config_path.empty()) apply_options(cfg, read_config_file(config_path));
  std::map<std::string, std::string> cli;
  for (const auto& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("override must be key=value, got '" + item + "'");
    cli[item.substr(0, eq)] = item.substr(eq + 1);
  }
  apply_options(cfg, cli);
  cfg.validate();
  return cfg;
}

}  // namespace dsfusion
