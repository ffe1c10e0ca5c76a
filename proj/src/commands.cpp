#include "holograph/commands.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstring>
#include <sstream>

#include "holograph/errors.hpp"
#include "holograph/io_util.hpp"
#include "holograph/synth.hpp"

namespace holograph {

using json = nlohmann::json;

namespace {

constexpr char kStoreMagic[4] = {'H', 'G', 'S', '1'};
constexpr std::uint32_t kStoreVersion = 1;

void require(bool ok, const char* what) {
  if (!ok) throw ConfigError(what);
}

std::string metrics_csv_text(const std::vector<EpochMetrics>& history) {
  std::string out = "epoch,train_loss,train_acc,test_acc\n";
  for (const auto& m : history) {
    out += std::to_string(m.epoch);
    out += ',';
    out += format_double(m.train_loss);
    out += ',';
    out += format_double(m.train_acc);
    out += ',';
    out += format_double(m.test_acc);
    out += '\n';
  }
  return out;
}

// Shared train loop: fresh state from the config seed, fit over the store.
std::vector<EpochMetrics> run_fit(const RunConfig& cfg, const SampleStore& store,
                                  const RunControls& controls, TrainState* final_state,
                                  NetworkConfig* final_topology) {
  NetworkConfig topology = to_network_config(cfg, store.num_classes);
  TrainState state = init_state(topology.grid, topology.num_layers, cfg.seed, cfg.hyper);

  FitDataset data = dataset_from_store(store, cfg);
  FitOptions opts;
  opts.deterministic = controls.deterministic;
  opts.threads = controls.threads;
  opts.normalize_detector = cfg.normalize_detector_sums;
  opts.on_epoch = controls.progress;

  FitResult result = fit(topology, std::move(state), data, opts);
  if (final_state) *final_state = std::move(result.state);
  if (final_topology) {
    *final_topology = std::move(topology);
    if (final_state) final_topology->masks = final_state->masks;
  }
  return std::move(result.history);
}

SampleStore load_or_build_store(const RunConfig& cfg) {
  const auto path = store_path(cfg);
  SampleStore store;
  if (std::filesystem::exists(path)) {
    store = load_sample_store(path);
    require(store.k == cfg.k && store.d == cfg.d,
            "sample store on disk was prepped with different k/d; rerun prep");
  } else {
    store = build_sample_store(cfg);
    std::filesystem::create_directories(path.parent_path());
    save_sample_store(store, path);
  }
  return store;
}

std::string sweep_csv_text(const std::vector<std::string>& variants,
                           const std::vector<std::vector<double>>& columns) {
  std::string out = "epoch";
  for (const auto& name : variants) {
    out += ',';
    out += name;
  }
  out += '\n';
  std::size_t epochs = 0;
  for (const auto& col : columns) epochs = std::max(epochs, col.size());
  for (std::size_t e = 0; e < epochs; ++e) {
    out += std::to_string(e + 1);
    for (const auto& col : columns) {
      out += ',';
      out += e < col.size() ? format_double(col[e]) : std::string("nan");
    }
    out += '\n';
  }
  return out;
}

SweepOutcome run_sweep(const std::vector<std::string>& variants,
                       const std::vector<RunConfig>& configs,
                       const std::vector<const SampleStore*>& stores,
                       const std::filesystem::path& csv_path, const RunControls& controls) {
  SweepOutcome out;
  out.variants = variants;
  for (std::size_t i = 0; i < variants.size(); ++i) {
    auto history = run_fit(configs[i], *stores[i], controls, nullptr, nullptr);
    std::vector<double> acc;
    double best = 0.0;
    for (const auto& m : history) {
      acc.push_back(m.test_acc);
      best = std::max(best, m.test_acc);
    }
    out.test_acc.push_back(std::move(acc));
    out.best_acc.push_back(best);
  }
  std::filesystem::create_directories(csv_path.parent_path());
  write_text_atomic(csv_path, sweep_csv_text(out.variants, out.test_acc));
  out.csv = csv_path;
  return out;
}

}  // namespace

NodeSample SampleStore::sample(std::uint32_t node) const {
  if (node >= num_nodes) throw std::invalid_argument("sample: node id out of range");
  NodeSample s;
  s.target = node;
  s.label = labels[node];
  s.k = k;
  s.d = d;
  const std::size_t block = std::size_t{k} * d;
  s.rows.assign(rows.begin() + node * block, rows.begin() + (node + 1) * block);
  s.scores.assign(scores.begin() + std::size_t{node} * k,
                  scores.begin() + std::size_t{node + 1} * k);
  return s;
}

SampleStore build_sample_store(const RunConfig& cfg) {
  require(!cfg.dataset.empty(), "config needs a dataset directory");
  require(cfg.k >= 1, "input.k must be at least 1");
  Graph g = load_dataset(cfg.dataset);
  require(cfg.test_size <= g.num_nodes, "training.test_size exceeds the node count");

  SampleStore store;
  store.num_nodes = g.num_nodes;
  store.num_classes = g.num_classes;
  store.k = cfg.k;
  store.d = cfg.d;
  store.labels = g.labels;
  store.pca = pca_fit(g.features, cfg.d);

  auto compressed = pca_transform(store.pca, g.features);
  minmax_normalize(compressed, cfg.normalize_per_node);

  const std::size_t block = std::size_t{cfg.k} * cfg.d;
  store.rows.assign(std::size_t{g.num_nodes} * block, 0.0);
  store.scores.assign(std::size_t{g.num_nodes} * cfg.k, 0.0);
  for (std::uint32_t v = 0; v < g.num_nodes; ++v) {
    auto ppr = ppr_topk(g, v, cfg.alpha, cfg.epsilon, cfg.k);
    for (std::size_t r = 0; r < ppr.ids.size(); ++r) {
      const auto& feats = compressed[ppr.ids[r]];
      std::copy(feats.begin(), feats.end(), store.rows.begin() + v * block + r * cfg.d);
      store.scores[std::size_t{v} * cfg.k + r] = ppr.scores[r];
    }
  }

  store.ids = split(g.num_nodes, cfg.test_size, cfg.seed);
  return store;
}

void save_sample_store(const SampleStore& store, const std::filesystem::path& path) {
  BinWriter w;
  w.bytes(kStoreMagic, 4);
  w.u32(kStoreVersion);
  w.u32(store.num_nodes);
  w.u32(store.num_classes);
  w.u32(store.k);
  w.u32(store.d);
  w.u32(store.pca.input_dim);
  w.f64_array(store.pca.mean.data(), store.pca.mean.size());
  for (const auto& comp : store.pca.components) w.f64_array(comp.data(), comp.size());
  w.f64_array(store.pca.variances.data(), store.pca.variances.size());
  for (std::uint32_t label : store.labels) w.u32(label);
  w.f64_array(store.rows.data(), store.rows.size());
  w.f64_array(store.scores.data(), store.scores.size());
  w.u32(static_cast<std::uint32_t>(store.ids.train_ids.size()));
  for (std::uint32_t id : store.ids.train_ids) w.u32(id);
  w.u32(static_cast<std::uint32_t>(store.ids.test_ids.size()));
  for (std::uint32_t id : store.ids.test_ids) w.u32(id);
  w.commit(path);
}

SampleStore load_sample_store(const std::filesystem::path& path) {
  BinReader r = BinReader::from_file(path);
  char magic[4];
  r.raw(magic, 4, "magic");
  if (std::memcmp(magic, kStoreMagic, 4) != 0) throw FormatError("bad magic", 0, "magic");
  const auto version = r.u32("version");
  if (version != kStoreVersion) throw FormatError("unsupported version", 4, "version");

  SampleStore store;
  store.num_nodes = r.u32("node count");
  store.num_classes = r.u32("class count");
  store.k = r.u32("sample rows");
  store.d = r.u32("sample columns");
  const auto input_dim = r.u32("pca input dim");
  if (store.k == 0 || store.d == 0 || store.d > input_dim)
    throw FormatError("implausible sample shape", r.offset(), "header");
  if (store.num_nodes > (1u << 27) || input_dim > (1u << 20))
    throw FormatError("implausible sizes", r.offset(), "header");

  auto need_f64 = [&](std::size_t count, const char* section) {
    if (r.surplus() / 8 < count) throw FormatError("file too short", r.offset(), section);
  };

  store.pca.input_dim = input_dim;
  store.pca.output_dim = store.d;
  need_f64(input_dim, "pca mean");
  store.pca.mean.resize(input_dim);
  r.f64_array(store.pca.mean.data(), input_dim, "pca mean");
  need_f64(std::size_t{store.d} * input_dim, "pca components");
  store.pca.components.assign(store.d, std::vector<double>(input_dim));
  for (auto& comp : store.pca.components) r.f64_array(comp.data(), input_dim, "pca components");
  need_f64(store.d, "pca variances");
  store.pca.variances.resize(store.d);
  r.f64_array(store.pca.variances.data(), store.d, "pca variances");

  if (r.surplus() / 4 < store.num_nodes)
    throw FormatError("file too short", r.offset(), "labels");
  store.labels.resize(store.num_nodes);
  for (auto& label : store.labels) {
    label = r.u32("labels");
    if (label >= store.num_classes) throw FormatError("label out of range", r.offset(), "labels");
  }

  const std::size_t block = std::size_t{store.k} * store.d;
  need_f64(std::size_t{store.num_nodes} * block, "rows");
  store.rows.resize(std::size_t{store.num_nodes} * block);
  r.f64_array(store.rows.data(), store.rows.size(), "rows");
  need_f64(std::size_t{store.num_nodes} * store.k, "scores");
  store.scores.resize(std::size_t{store.num_nodes} * store.k);
  r.f64_array(store.scores.data(), store.scores.size(), "scores");

  for (auto* list : {&store.ids.train_ids, &store.ids.test_ids}) {
    const char* section = list == &store.ids.train_ids ? "train ids" : "test ids";
    const auto count = r.u32(section);
    if (r.surplus() / 4 < count) throw FormatError("file too short", r.offset(), section);
    list->resize(count);
    for (auto& id : *list) {
      id = r.u32(section);
      if (id >= store.num_nodes) throw FormatError("id out of range", r.offset(), section);
    }
  }
  if (store.ids.train_ids.size() + store.ids.test_ids.size() != store.num_nodes)
    throw FormatError("split does not cover the graph", r.offset(), "split");
  if (r.surplus() != 0) throw FormatError("trailing bytes", r.offset(), "end of file");
  return store;
}

std::filesystem::path store_path(const RunConfig& cfg) {
  return std::filesystem::path(cfg.out_dir) / "samples.hgs";
}

std::filesystem::path checkpoint_path(const RunConfig& cfg) {
  return std::filesystem::path(cfg.out_dir) / "checkpoint.hgr";
}

FitDataset dataset_from_store(const SampleStore& store, const RunConfig& cfg) {
  FitDataset data;
  const GridSpec grid{cfg.n, cfg.pitch, cfg.wavelength};
  const bool on_phase = cfg.encode_score_on_phase;
  data.encode = [&store, grid, on_phase](std::uint32_t node) {
    return assemble_input(store.sample(node), grid, on_phase);
  };
  data.labels = store.labels;
  data.train_ids = store.ids.train_ids;
  data.test_ids = store.ids.test_ids;
  return data;
}

PrepOutcome cmd_prep(const RunConfig& cfg) {
  SampleStore store = build_sample_store(cfg);
  const auto path = store_path(cfg);
  std::filesystem::create_directories(path.parent_path());
  save_sample_store(store, path);
  PrepOutcome out;
  out.store = path;
  out.num_nodes = store.num_nodes;
  out.num_classes = store.num_classes;
  out.train_count = static_cast<std::uint32_t>(store.ids.train_ids.size());
  out.test_count = static_cast<std::uint32_t>(store.ids.test_ids.size());
  return out;
}

TrainOutcome cmd_train(const RunConfig& cfg, const RunControls& controls) {
  SampleStore store = load_or_build_store(cfg);

  TrainState state;
  NetworkConfig topology;
  auto history = run_fit(cfg, store, controls, &state, &topology);

  TrainOutcome out;
  out.history = history;
  if (!history.empty()) out.final_metrics = history.back();

  const std::filesystem::path dir(cfg.out_dir);
  std::filesystem::create_directories(dir);

  topology.masks = state.masks;
  out.checkpoint = checkpoint_path(cfg);
  save_checkpoint(topology, &state.moments, out.checkpoint);

  out.metrics_csv = dir / "metrics.csv";
  write_text_atomic(out.metrics_csv, metrics_csv_text(history));

  // out_dir is wherever this file sits; leaving it out keeps equal-seed runs
  // into different directories byte-identical.
  json cfg_json = json::parse(dump_run_config(cfg));
  cfg_json.erase("out_dir");
  json meta{
      {"config", std::move(cfg_json)},
      {"dataset",
       {{"num_nodes", store.num_nodes},
        {"num_classes", store.num_classes},
        {"train_count", store.ids.train_ids.size()},
        {"test_count", store.ids.test_ids.size()}}},
      {"final",
       {{"epoch", out.final_metrics.epoch},
        {"train_loss", out.final_metrics.train_loss},
        {"train_acc", out.final_metrics.train_acc},
        {"test_acc", out.final_metrics.test_acc}}},
  };
  write_text_atomic(dir / "run_meta.json", meta.dump(2) + "\n");
  return out;
}

EvalOutcome cmd_eval(const RunConfig& cfg, const std::filesystem::path& checkpoint,
                     const RunControls& controls) {
  SampleStore store = load_or_build_store(cfg);
  if (store.ids.test_ids.empty()) throw std::invalid_argument("eval: the test set is empty");

  LoadedCheckpoint loaded = load_checkpoint(checkpoint);
  const NetworkConfig& net = loaded.config;
  require(net.grid.n == cfg.n, "checkpoint grid size differs from the config");
  require(net.detector.regions.size() == store.num_classes,
          "checkpoint class count differs from the dataset");

  NetworkPlan plan = make_plan(net);
  FitDataset data = dataset_from_store(store, cfg);

  const std::uint32_t C = store.num_classes;
  EvalOutcome out;
  out.confusion.assign(C, std::vector<std::uint64_t>(C, 0));
  std::uint64_t correct = 0;
  for (std::uint32_t node : store.ids.test_ids) {
    auto fwd = forward_with_plan(plan, data.encode(node));
    auto sums = detect(fwd.intensity_map, net.grid.n, net.detector);
    std::uint32_t best = 0;
    for (std::uint32_t c = 1; c < sums.size(); ++c)
      if (sums[c] > sums[best]) best = c;
    out.confusion[store.labels[node]][best] += 1;
    if (best == store.labels[node]) ++correct;
  }
  out.accuracy = static_cast<double>(correct) / static_cast<double>(store.ids.test_ids.size());
  (void)controls;

  std::string csv = "true_class";
  for (std::uint32_t c = 0; c < C; ++c) csv += ",pred_" + std::to_string(c);
  csv += '\n';
  for (std::uint32_t t = 0; t < C; ++t) {
    csv += std::to_string(t);
    for (std::uint32_t c = 0; c < C; ++c) csv += ',' + std::to_string(out.confusion[t][c]);
    csv += '\n';
  }
  const std::filesystem::path dir(cfg.out_dir);
  std::filesystem::create_directories(dir);
  out.confusion_csv = dir / "confusion.csv";
  write_text_atomic(out.confusion_csv, csv);
  write_text_atomic(dir / "eval.json",
                    json{{"test_accuracy", out.accuracy},
                         {"test_count", store.ids.test_ids.size()}}
                            .dump(2) +
                        "\n");
  return out;
}

SweepOutcome cmd_explore(const RunConfig& cfg, const std::vector<std::string>& setups,
                         const RunControls& controls) {
  require(!setups.empty(), "explore needs at least one setup");
  std::vector<std::string> names;
  std::vector<RunConfig> configs;
  for (const auto& s : setups) {
    RunConfig variant = cfg;
    variant.explicit_skips.reset();
    if (s == "none") {
      variant.skip_setup = "none";
      names.push_back("none");
    } else {
      variant.skip_setup = s;
      build_setup(s);  // reject unknown ids before any training happens
      names.push_back(s.rfind("setup", 0) == 0 ? s : "setup" + s);
    }
    configs.push_back(std::move(variant));
  }

  SampleStore store = load_or_build_store(cfg);  // skip choice does not affect prep
  std::vector<const SampleStore*> stores(configs.size(), &store);
  return run_sweep(names, configs, stores, std::filesystem::path(cfg.out_dir) / "explore.csv",
                   controls);
}

SweepOutcome cmd_ablate(const RunConfig& cfg, const std::string& axis,
                        const RunControls& controls) {
  std::vector<std::string> names;
  std::vector<RunConfig> configs;
  std::vector<SampleStore> owned;

  if (axis == "k") {
    for (std::uint32_t k : {3u, 5u, 10u, 20u, 50u, 100u}) {
      RunConfig variant = cfg;
      variant.k = k;
      variant.out_dir = (std::filesystem::path(cfg.out_dir) / ("k" + std::to_string(k))).string();
      names.push_back("k" + std::to_string(k));
      configs.push_back(std::move(variant));
    }
  } else if (axis == "d") {
    for (std::uint32_t d : {40u, 60u, 80u, 100u, 120u, 140u}) {
      RunConfig variant = cfg;
      variant.d = d;
      variant.out_dir = (std::filesystem::path(cfg.out_dir) / ("d" + std::to_string(d))).string();
      names.push_back("d" + std::to_string(d));
      configs.push_back(std::move(variant));
    }
  } else if (axis == "score") {
    for (bool flag : {false, true}) {
      RunConfig variant = cfg;
      variant.encode_score_on_phase = flag;
      names.push_back(flag ? "score_on" : "score_off");
      configs.push_back(std::move(variant));
    }
  } else {
    throw ConfigError("unknown ablation axis \"" + axis + "\" (want k, d or score)");
  }

  owned.reserve(configs.size());
  std::vector<const SampleStore*> stores;
  if (axis == "score") {
    owned.push_back(load_or_build_store(cfg));  // the flag only matters at encode time
    stores.assign(configs.size(), &owned[0]);
  } else {
    for (const auto& variant : configs) owned.push_back(load_or_build_store(variant));
    for (const auto& store : owned) stores.push_back(&store);
  }
  return run_sweep(names, configs, stores,
                   std::filesystem::path(cfg.out_dir) / ("ablate_" + axis + ".csv"), controls);
}

GradCheckReport cmd_gradcheck(const RunConfig& cfg) {
  NetworkConfig small = grad_check_config(cfg.seed);
  GradCheckOptions opts;
  opts.seed = cfg.seed;
  GradCheckReport report = grad_check(small, opts);

  json doc{{"params_checked", report.params_checked},
           {"max_rel_err", report.max_rel_err},
           {"median_rel_err", report.median_rel_err},
           {"grad_rms", report.grad_rms},
           {"fd_step", report.fd_step},
           {"tolerance", report.tolerance},
           {"passed", report.passed}};
  const std::filesystem::path dir(cfg.out_dir);
  std::filesystem::create_directories(dir);
  write_text_atomic(dir / "gradcheck.json", doc.dump(2) + "\n");
  return report;
}

void cmd_synth(const std::filesystem::path& out_dir, std::uint64_t seed) {
  generate_synthetic(out_dir, seed);
}

}  // namespace holograph
