#include "ntrocr/config.hpp"

#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ntrocr/errors.hpp"
#include "ntrocr/io.hpp"

namespace ntrocr {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

long long parse_ll(const std::string& key, const std::string& value) {
  size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(value, &used);
  } catch (const std::exception&) {
    throw ValidationError("config: invalid value for '" + key + "': " + value);
  }
  if (used != value.size()) {
    throw ValidationError("config: invalid value for '" + key + "': " + value);
  }
  return v;
}

int parse_int(const std::string& key, const std::string& value) {
  long long v = parse_ll(key, value);
  if (v < -(1ll << 31) || v >= (1ll << 31)) {
    throw ValidationError("config: value out of range for '" + key + "'");
  }
  return static_cast<int>(v);
}

double parse_double(const std::string& key, const std::string& value) {
  size_t used = 0;
  double v = 0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    throw ValidationError("config: invalid value for '" + key + "': " + value);
  }
  if (used != value.size()) {
    throw ValidationError("config: invalid value for '" + key + "': " + value);
  }
  return v;
}

uint64_t parse_u64(const std::string& key, const std::string& value) {
  if (!value.empty() && value[0] == '-') {
    throw ValidationError("config: invalid value for '" + key + "': " + value);
  }
  size_t used = 0;
  uint64_t v = 0;
  try {
    v = std::stoull(value, &used);
  } catch (const std::exception&) {
    throw ValidationError("config: invalid value for '" + key + "': " + value);
  }
  if (used != value.size()) {
    throw ValidationError("config: invalid value for '" + key + "': " + value);
  }
  return v;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"image_size",
       [](RunConfig& c, const std::string& v) {
         c.image_size = parse_int("image_size", v);
       }},
      {"patch_size",
       [](RunConfig& c, const std::string& v) {
         c.patch_size = parse_int("patch_size", v);
       }},
      {"d_model",
       [](RunConfig& c, const std::string& v) {
         c.d_model = parse_int("d_model", v);
       }},
      {"n_heads",
       [](RunConfig& c, const std::string& v) {
         c.n_heads = parse_int("n_heads", v);
       }},
      {"enc_layers",
       [](RunConfig& c, const std::string& v) {
         c.enc_layers = parse_int("enc_layers", v);
       }},
      {"dec_layers",
       [](RunConfig& c, const std::string& v) {
         c.dec_layers = parse_int("dec_layers", v);
       }},
      {"mlp_ratio",
       [](RunConfig& c, const std::string& v) {
         c.mlp_ratio = parse_int("mlp_ratio", v);
       }},
      {"max_len",
       [](RunConfig& c, const std::string& v) {
         c.max_len = parse_int("max_len", v);
       }},
      {"epochs",
       [](RunConfig& c, const std::string& v) {
         c.epochs = parse_int("epochs", v);
       }},
      {"batch_size",
       [](RunConfig& c, const std::string& v) {
         c.batch_size = parse_int("batch_size", v);
       }},
      {"lr",
       [](RunConfig& c, const std::string& v) { c.lr = parse_double("lr", v); }},
      {"beta1",
       [](RunConfig& c, const std::string& v) {
         c.beta1 = parse_double("beta1", v);
       }},
      {"beta2",
       [](RunConfig& c, const std::string& v) {
         c.beta2 = parse_double("beta2", v);
       }},
      {"eps",
       [](RunConfig& c, const std::string& v) {
         c.eps = parse_double("eps", v);
       }},
      {"weight_decay",
       [](RunConfig& c, const std::string& v) {
         c.weight_decay = parse_double("weight_decay", v);
       }},
      {"flip_prob",
       [](RunConfig& c, const std::string& v) {
         c.flip_prob = parse_double("flip_prob", v);
       }},
      {"rot_min",
       [](RunConfig& c, const std::string& v) {
         c.rot_min = parse_double("rot_min", v);
       }},
      {"rot_max",
       [](RunConfig& c, const std::string& v) {
         c.rot_max = parse_double("rot_max", v);
       }},
      {"seed",
       [](RunConfig& c, const std::string& v) {
         c.seed = parse_u64("seed", v);
       }},
      {"language",
       [](RunConfig& c, const std::string& v) { c.language = v; }},
  };
  return table;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::map<std::string, bool> seen;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config line " + std::to_string(line_no) +
                            ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    auto it = setters().find(key);
    if (it == setters().end()) {
      throw ValidationError("config: unknown key '" + key + "'");
    }
    if (seen[key]) {
      throw ValidationError("config: duplicate key '" + key + "'");
    }
    seen[key] = true;
    it->second(cfg, value);
  }
  validate_run_config(cfg);
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  return parse_config(read_file(path));
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream out;
  out << "image_size=" << c.image_size << "\n";
  out << "patch_size=" << c.patch_size << "\n";
  out << "d_model=" << c.d_model << "\n";
  out << "n_heads=" << c.n_heads << "\n";
  out << "enc_layers=" << c.enc_layers << "\n";
  out << "dec_layers=" << c.dec_layers << "\n";
  out << "mlp_ratio=" << c.mlp_ratio << "\n";
  out << "max_len=" << c.max_len << "\n";
  out << "epochs=" << c.epochs << "\n";
  out << "batch_size=" << c.batch_size << "\n";
  out << "lr=" << format_double(c.lr) << "\n";
  out << "beta1=" << format_double(c.beta1) << "\n";
  out << "beta2=" << format_double(c.beta2) << "\n";
  out << "eps=" << format_double(c.eps) << "\n";
  out << "weight_decay=" << format_double(c.weight_decay) << "\n";
  out << "flip_prob=" << format_double(c.flip_prob) << "\n";
  out << "rot_min=" << format_double(c.rot_min) << "\n";
  out << "rot_max=" << format_double(c.rot_max) << "\n";
  out << "seed=" << c.seed << "\n";
  out << "language=" << c.language << "\n";
  return out.str();
}

void validate_run_config(const RunConfig& c) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ValidationError("config: " + what);
  };
  require(c.epochs >= 1, "epochs must be >= 1");
  require(c.batch_size >= 1, "batch_size must be >= 1");
  require(c.lr > 0, "lr must be positive");
  require(c.beta1 >= 0 && c.beta1 < 1, "beta1 must lie in [0,1)");
  require(c.beta2 >= 0 && c.beta2 < 1, "beta2 must lie in [0,1)");
  require(c.eps > 0, "eps must be positive");
  require(c.weight_decay >= 0, "weight_decay must be >= 0");
  require(c.flip_prob >= 0 && c.flip_prob <= 1,
          "flip_prob must lie in [0,1]");
  require(c.rot_min <= c.rot_max, "rot_min must not exceed rot_max");
  require(c.rot_min >= -45 && c.rot_max <= 45,
          "rotation range must lie within [-45,45]");
  require(c.language == "bn" || c.language == "ne",
          "language must be 'bn' or 'ne'");
  // the model-side checks cover dims, divisibility, and max_len
  ModelConfig m = model_config(c, 4);
  validate_config(m);
}

ModelConfig model_config(const RunConfig& c, int vocab_size) {
  ModelConfig m;
  m.encoder.image_size = c.image_size;
  m.encoder.patch_size = c.patch_size;
  m.encoder.d_model = c.d_model;
  m.encoder.n_heads = c.n_heads;
  m.encoder.n_layers = c.enc_layers;
  m.encoder.mlp_ratio = c.mlp_ratio;
  m.decoder.vocab_size = vocab_size;
  m.decoder.d_model = c.d_model;
  m.decoder.n_heads = c.n_heads;
  m.decoder.n_layers = c.dec_layers;
  m.decoder.max_len = c.max_len;
  m.decoder.mlp_ratio = c.mlp_ratio;
  return m;
}

AugmentConfig augment_config(const RunConfig& c) {
  AugmentConfig a;
  a.flip_prob = c.flip_prob;
  a.rot_min = c.rot_min;
  a.rot_max = c.rot_max;
  a.seed = c.seed;
  return a;
}

}  // namespace ntrocr
