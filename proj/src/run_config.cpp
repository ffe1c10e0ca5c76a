#include "holograph/run_config.hpp"

#include <json.hpp>

#include <fstream>
#include <limits>
#include <sstream>

#include "holograph/errors.hpp"

namespace holograph {

using json = nlohmann::json;

namespace {

[[noreturn]] void bad_key(const std::string& scope, const std::string& key) {
  throw ConfigError("unknown config key \"" + scope + key + "\"");
}

void expect_keys(const json& obj, const std::string& scope,
                 std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* a : allowed)
      if (it.key() == a) {
        known = true;
        break;
      }
    if (!known) bad_key(scope, it.key());
  }
}

const json* find(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double as_double(const json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError("\"" + where + "\" must be a number");
  return v.get<double>();
}

std::uint64_t as_uint(const json& v, const std::string& where, std::uint64_t max) {
  if (!v.is_number_integer() || (v.is_number_integer() && v.get<std::int64_t>() < 0))
    throw ConfigError("\"" + where + "\" must be a non-negative integer");
  const auto raw = v.get<std::uint64_t>();
  if (raw > max) throw ConfigError("\"" + where + "\" is out of range");
  return raw;
}

bool as_bool(const json& v, const std::string& where) {
  if (!v.is_boolean()) throw ConfigError("\"" + where + "\" must be true or false");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& where) {
  if (!v.is_string()) throw ConfigError("\"" + where + "\" must be a string");
  return v.get<std::string>();
}

void read_double(const json& obj, const char* key, double& out, const std::string& scope) {
  if (const json* v = find(obj, key)) out = as_double(*v, scope + key);
}

void read_u32(const json& obj, const char* key, std::uint32_t& out, const std::string& scope) {
  if (const json* v = find(obj, key))
    out = static_cast<std::uint32_t>(
        as_uint(*v, scope + key, std::numeric_limits<std::uint32_t>::max()));
}

void read_bool(const json& obj, const char* key, bool& out, const std::string& scope) {
  if (const json* v = find(obj, key)) out = as_bool(*v, scope + key);
}

void read_string(const json& obj, const char* key, std::string& out, const std::string& scope) {
  if (const json* v = find(obj, key)) out = as_string(*v, scope + key);
}

}  // namespace

RunConfig parse_run_config_text(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  if (!root.is_object()) throw ConfigError(origin + ": top level must be an object");

  RunConfig cfg;
  expect_keys(root, "", {"dataset", "out_dir", "seed", "grid", "input", "network", "training"});
  read_string(root, "dataset", cfg.dataset, "");
  read_string(root, "out_dir", cfg.out_dir, "");
  if (const json* v = find(root, "seed"))
    cfg.seed = as_uint(*v, "seed", std::numeric_limits<std::uint64_t>::max());

  if (const json* g = find(root, "grid")) {
    if (!g->is_object()) throw ConfigError("\"grid\" must be an object");
    expect_keys(*g, "grid.", {"n", "pitch", "wavelength", "layer_distance", "pad_propagation"});
    read_u32(*g, "n", cfg.n, "grid.");
    read_double(*g, "pitch", cfg.pitch, "grid.");
    read_double(*g, "wavelength", cfg.wavelength, "grid.");
    read_double(*g, "layer_distance", cfg.layer_distance, "grid.");
    read_bool(*g, "pad_propagation", cfg.pad_propagation, "grid.");
  }

  if (const json* in = find(root, "input")) {
    if (!in->is_object()) throw ConfigError("\"input\" must be an object");
    expect_keys(*in, "input.",
                {"d", "k", "alpha", "epsilon", "encode_score_on_phase", "normalize_per_node"});
    read_u32(*in, "d", cfg.d, "input.");
    read_u32(*in, "k", cfg.k, "input.");
    read_double(*in, "alpha", cfg.alpha, "input.");
    read_double(*in, "epsilon", cfg.epsilon, "input.");
    read_bool(*in, "encode_score_on_phase", cfg.encode_score_on_phase, "input.");
    read_bool(*in, "normalize_per_node", cfg.normalize_per_node, "input.");
  }

  if (const json* net = find(root, "network")) {
    if (!net->is_object()) throw ConfigError("\"network\" must be an object");
    expect_keys(*net, "network.",
                {"num_layers", "feature_layers", "skip_setup", "detector_side"});
    read_u32(*net, "num_layers", cfg.num_layers, "network.");
    read_u32(*net, "feature_layers", cfg.feature_layers, "network.");
    read_u32(*net, "detector_side", cfg.detector_side, "network.");
    if (const json* sk = find(*net, "skip_setup")) {
      if (sk->is_string()) {
        cfg.skip_setup = sk->get<std::string>();
        cfg.explicit_skips.reset();
      } else if (sk->is_array()) {
        std::vector<SkipChannel> skips;
        for (const json& pair : *sk) {
          if (!pair.is_array() || pair.size() != 2)
            throw ConfigError("\"network.skip_setup\" entries must be [from, to] pairs");
          skips.push_back(
              {static_cast<std::uint32_t>(as_uint(pair[0], "network.skip_setup", 1u << 20)),
               static_cast<std::uint32_t>(as_uint(pair[1], "network.skip_setup", 1u << 20))});
        }
        cfg.explicit_skips = std::move(skips);
        cfg.skip_setup = "explicit";
      } else {
        throw ConfigError("\"network.skip_setup\" must be a setup name or a pair list");
      }
    }
  }

  if (const json* tr = find(root, "training")) {
    if (!tr->is_object()) throw ConfigError("\"training\" must be an object");
    expect_keys(*tr, "training.",
                {"learning_rate", "beta1", "beta2", "eps", "epochs", "batch_size", "test_size",
                 "normalize_detector_sums"});
    read_double(*tr, "learning_rate", cfg.hyper.learning_rate, "training.");
    read_double(*tr, "beta1", cfg.hyper.beta1, "training.");
    read_double(*tr, "beta2", cfg.hyper.beta2, "training.");
    read_double(*tr, "eps", cfg.hyper.eps_adam, "training.");
    read_u32(*tr, "epochs", cfg.hyper.epochs, "training.");
    read_u32(*tr, "batch_size", cfg.hyper.batch_size, "training.");
    read_u32(*tr, "test_size", cfg.test_size, "training.");
    read_bool(*tr, "normalize_detector_sums", cfg.normalize_detector_sums, "training.");
  }

  return cfg;
}

RunConfig parse_run_config(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config_text(buf.str(), file.string());
}

std::string dump_run_config(const RunConfig& cfg) {
  json net{{"num_layers", cfg.num_layers},
           {"feature_layers", cfg.feature_layers},
           {"detector_side", cfg.detector_side}};
  if (cfg.explicit_skips) {
    json list = json::array();
    for (const auto& s : *cfg.explicit_skips) list.push_back(json::array({s.from, s.to}));
    net["skip_setup"] = std::move(list);
  } else {
    net["skip_setup"] = cfg.skip_setup;
  }

  json root{
      {"dataset", cfg.dataset},
      {"out_dir", cfg.out_dir},
      {"seed", cfg.seed},
      {"grid",
       {{"n", cfg.n},
        {"pitch", cfg.pitch},
        {"wavelength", cfg.wavelength},
        {"layer_distance", cfg.layer_distance},
        {"pad_propagation", cfg.pad_propagation}}},
      {"input",
       {{"d", cfg.d},
        {"k", cfg.k},
        {"alpha", cfg.alpha},
        {"epsilon", cfg.epsilon},
        {"encode_score_on_phase", cfg.encode_score_on_phase},
        {"normalize_per_node", cfg.normalize_per_node}}},
      {"network", std::move(net)},
      {"training",
       {{"learning_rate", cfg.hyper.learning_rate},
        {"beta1", cfg.hyper.beta1},
        {"beta2", cfg.hyper.beta2},
        {"eps", cfg.hyper.eps_adam},
        {"epochs", cfg.hyper.epochs},
        {"batch_size", cfg.hyper.batch_size},
        {"test_size", cfg.test_size},
        {"normalize_detector_sums", cfg.normalize_detector_sums}}},
  };
  return root.dump(2) + "\n";
}

std::vector<SkipChannel> resolve_skips(const RunConfig& cfg) {
  if (cfg.explicit_skips) return *cfg.explicit_skips;
  if (cfg.skip_setup == "none" || cfg.skip_setup.empty()) return {};
  return build_setup(cfg.skip_setup);
}

NetworkConfig to_network_config(const RunConfig& cfg, std::uint32_t num_classes) {
  NetworkConfig net;
  net.grid = GridSpec{cfg.n, cfg.pitch, cfg.wavelength};
  net.layer_distance = cfg.layer_distance;
  net.num_layers = cfg.num_layers;
  net.feature_layers = cfg.feature_layers;
  net.skips = resolve_skips(cfg);
  net.detector = DetectorLayout::uniform(cfg.n, num_classes, cfg.detector_side);
  net.pad_propagation = cfg.pad_propagation;
  net.masks.assign(cfg.num_layers, PhaseMask(cfg.n));
  validate(net);
  return net;
}

}  // namespace holograph
