#include "holograph/graphprep.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <fstream>
#include <numbers>
#include <set>
#include <string>

#include "holograph/errors.hpp"
#include "holograph/rng.hpp"

namespace holograph {

namespace {

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  // trailing blank lines are tolerated, interior ones are not
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

double parse_double(const std::string& file, std::size_t line_no, std::string_view tok) {
  double v = 0.0;
  const char* b = tok.data();
  const char* e = b + tok.size();
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc{} || ptr != e)
    throw ParseError(file, line_no, "expected a number, got '" + std::string(tok) + "'");
  if (!std::isfinite(v)) throw ParseError(file, line_no, "non-finite feature value");
  return v;
}

std::int64_t parse_int(const std::string& file, std::size_t line_no, std::string_view tok) {
  std::int64_t v = 0;
  const char* b = tok.data();
  const char* e = b + tok.size();
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc{} || ptr != e)
    throw ParseError(file, line_no, "expected an integer, got '" + std::string(tok) + "'");
  return v;
}

std::vector<std::string_view> split_on(const std::string& s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = s.find(sep, pos);
    if (next == std::string::npos) {
      out.emplace_back(s.data() + pos, s.size() - pos);
      return out;
    }
    out.emplace_back(s.data() + pos, next - pos);
    pos = next + 1;
  }
}

std::vector<std::string_view> split_ws(const std::string& s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t b = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > b) out.emplace_back(s.data() + b, i - b);
  }
  return out;
}

}  // namespace

Graph load_dataset(const std::filesystem::path& dir) {
  const auto features_path = dir / "features.csv";
  const auto labels_path = dir / "labels.csv";
  const auto edges_path = dir / "edges.tsv";
  for (const auto& p : {features_path, labels_path, edges_path})
    if (!std::filesystem::exists(p))
      throw ParseError(p.string(), 0, "missing dataset file");

  // features.csv defines V and D
  const std::string ffile = features_path.string();
  auto flines = read_lines(features_path);
  if (flines.empty()) throw ParseError(ffile, 0, "no feature rows");
  std::vector<std::vector<double>> features;
  features.reserve(flines.size());
  std::size_t dim = 0;
  for (std::size_t i = 0; i < flines.size(); ++i) {
    auto toks = split_on(flines[i], ',');
    if (i == 0) dim = toks.size();
    if (toks.size() != dim)
      throw ParseError(ffile, i + 1,
                       "expected " + std::to_string(dim) + " values, got " +
                           std::to_string(toks.size()));
    std::vector<double> row(dim);
    for (std::size_t j = 0; j < dim; ++j) row[j] = parse_double(ffile, i + 1, toks[j]);
    features.push_back(std::move(row));
  }
  const std::uint32_t V = static_cast<std::uint32_t>(features.size());

  const std::string lfile = labels_path.string();
  auto llines = read_lines(labels_path);
  if (llines.size() != V)
    throw ParseError(lfile, llines.size(),
                     "expected " + std::to_string(V) + " labels, got " +
                         std::to_string(llines.size()));
  std::vector<std::uint32_t> labels(V);
  for (std::size_t i = 0; i < V; ++i) {
    auto toks = split_ws(llines[i]);
    if (toks.size() != 1) throw ParseError(lfile, i + 1, "expected one label");
    const std::int64_t lab = parse_int(lfile, i + 1, toks[0]);
    if (lab < 0) throw ParseError(lfile, i + 1, "label out of range");
    labels[i] = static_cast<std::uint32_t>(lab);
  }

  const std::string efile = edges_path.string();
  auto elines = read_lines(edges_path);
  std::vector<std::set<std::uint32_t>> adj(V);
  for (std::size_t i = 0; i < elines.size(); ++i) {
    if (elines[i].empty()) throw ParseError(efile, i + 1, "empty edge line");
    auto toks = split_ws(elines[i]);
    if (toks.size() != 2) throw ParseError(efile, i + 1, "expected two node ids");
    const std::int64_t a = parse_int(efile, i + 1, toks[0]);
    const std::int64_t b = parse_int(efile, i + 1, toks[1]);
    if (a < 0 || a >= V || b < 0 || b >= V)
      throw ParseError(efile, i + 1, "node id out of range (non-contiguous ids?)");
    if (a == b) continue;  // self-loops dropped silently
    adj[static_cast<std::size_t>(a)].insert(static_cast<std::uint32_t>(b));
    adj[static_cast<std::size_t>(b)].insert(static_cast<std::uint32_t>(a));
  }

  // One cleanup pass over the original graph: drop isolated and
  // all-zero-feature nodes together, then reindex survivors.
  std::vector<std::uint32_t> remap(V, UINT32_MAX);
  std::vector<std::uint32_t> kept;
  for (std::uint32_t v = 0; v < V; ++v) {
    const bool isolated = adj[v].empty();
    bool featureless = true;
    for (double x : features[v])
      if (x != 0.0) {
        featureless = false;
        break;
      }
    if (!isolated && !featureless) {
      remap[v] = static_cast<std::uint32_t>(kept.size());
      kept.push_back(v);
    }
  }

  Graph g;
  g.num_nodes = static_cast<std::uint32_t>(kept.size());
  g.feature_dim = static_cast<std::uint32_t>(dim);
  g.adjacency.resize(g.num_nodes);
  g.features.resize(g.num_nodes);
  g.labels.resize(g.num_nodes);
  for (std::uint32_t nv = 0; nv < g.num_nodes; ++nv) {
    const std::uint32_t old = kept[nv];
    g.features[nv] = std::move(features[old]);
    g.labels[nv] = labels[old];
    for (std::uint32_t nb : adj[old])
      if (remap[nb] != UINT32_MAX) g.adjacency[nv].push_back(remap[nb]);
    // std::set iteration was ordered on old ids; remap preserves order
  }
  std::uint32_t max_label = 0;
  for (std::uint32_t l : g.labels) max_label = std::max(max_label, l);
  g.num_classes = g.num_nodes ? max_label + 1 : 0;
  return g;
}

PcaModel pca_fit(const std::vector<std::vector<double>>& features, std::uint32_t d) {
  if (features.empty()) throw std::invalid_argument("pca needs at least one row");
  const std::size_t V = features.size();
  const std::size_t D = features[0].size();
  if (d < 1 || d > std::min(V, D))
    throw std::invalid_argument("pca dimension out of range");

  PcaModel model;
  model.input_dim = static_cast<std::uint32_t>(D);
  model.output_dim = d;
  model.mean.assign(D, 0.0);
  for (const auto& row : features)
    for (std::size_t j = 0; j < D; ++j) model.mean[j] += row[j];
  for (auto& m : model.mean) m /= static_cast<double>(V);

  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(D),
                                              static_cast<Eigen::Index>(D));
  Eigen::VectorXd centered(static_cast<Eigen::Index>(D));
  for (const auto& row : features) {
    for (std::size_t j = 0; j < D; ++j) centered[static_cast<Eigen::Index>(j)] = row[j] - model.mean[j];
    cov.selfadjointView<Eigen::Lower>().rankUpdate(centered);
  }
  cov = cov.selfadjointView<Eigen::Lower>();
  cov /= static_cast<double>(V > 1 ? V - 1 : 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw NumericError("eigendecomposition failed");
  const auto& evals = solver.eigenvalues();   // ascending
  const auto& evecs = solver.eigenvectors();

  model.components.resize(d);
  model.variances.resize(d);
  for (std::uint32_t c = 0; c < d; ++c) {
    const Eigen::Index col = static_cast<Eigen::Index>(D - 1 - c);
    model.variances[c] = evals[col];
    auto& comp = model.components[c];
    comp.resize(D);
    // sign convention: largest-magnitude coordinate is positive
    Eigen::Index peak = 0;
    evecs.col(col).cwiseAbs().maxCoeff(&peak);
    const double sign = evecs(peak, col) < 0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < D; ++j)
      comp[j] = sign * evecs(static_cast<Eigen::Index>(j), col);
  }
  return model;
}

std::vector<std::vector<double>> pca_transform(const PcaModel& model,
                                               const std::vector<std::vector<double>>& features) {
  std::vector<std::vector<double>> out(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].size() != model.input_dim)
      throw std::invalid_argument("feature row does not match pca input dimension");
    out[i].resize(model.output_dim);
    for (std::uint32_t c = 0; c < model.output_dim; ++c) {
      double acc = 0.0;
      const auto& comp = model.components[c];
      for (std::size_t j = 0; j < comp.size(); ++j)
        acc += (features[i][j] - model.mean[j]) * comp[j];
      out[i][c] = acc;
    }
  }
  return out;
}

void minmax_normalize(std::vector<std::vector<double>>& m, bool per_row) {
  if (m.empty()) return;
  auto scale_range = [](std::vector<double>* rows, std::size_t count, double lo, double hi) {
    const double span = hi - lo;
    for (std::size_t r = 0; r < count; ++r)
      for (auto& x : rows[r]) x = span > 0.0 ? (x - lo) / span : 0.0;
  };
  if (per_row) {
    for (auto& row : m) {
      if (row.empty()) continue;
      const auto [lo, hi] = std::minmax_element(row.begin(), row.end());
      scale_range(&row, 1, *lo, *hi);
    }
  } else {
    double lo = m[0].empty() ? 0.0 : m[0][0], hi = lo;
    for (const auto& row : m)
      for (double x : row) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
    scale_range(m.data(), m.size(), lo, hi);
  }
}

PprResult ppr_topk(const Graph& graph, std::uint32_t target, double alpha, double epsilon,
                   std::uint32_t k) {
  if (target >= graph.num_nodes) throw std::invalid_argument("ppr target out of range");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must be in (0,1)");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (k < 1) throw std::invalid_argument("k must be at least 1");

  std::vector<double> p(graph.num_nodes, 0.0), r(graph.num_nodes, 0.0);
  std::vector<std::uint8_t> queued(graph.num_nodes, 0);
  std::deque<std::uint32_t> queue;
  r[target] = 1.0;
  queue.push_back(target);
  queued[target] = 1;

  auto degree = [&](std::uint32_t u) { return graph.adjacency[u].size(); };

  while (!queue.empty()) {
    const std::uint32_t u = queue.front();
    queue.pop_front();
    queued[u] = 0;
    const std::size_t deg = degree(u);
    if (deg == 0) {
      // nowhere to push: the walk is stuck at u, all residual mass settles
      p[u] += r[u];
      r[u] = 0.0;
      continue;
    }
    const double rho = r[u];
    if (rho < epsilon * static_cast<double>(deg)) continue;  // re-queued stale entry
    p[u] += alpha * rho;
    r[u] = 0.0;
    const double share = (1.0 - alpha) * rho / static_cast<double>(deg);
    for (std::uint32_t v : graph.adjacency[u]) {
      r[v] += share;
      if (!queued[v] && r[v] >= epsilon * static_cast<double>(degree(v))) {
        queue.push_back(v);
        queued[v] = 1;
      }
    }
  }

  std::vector<std::uint32_t> candidates;
  for (std::uint32_t v = 0; v < graph.num_nodes; ++v)
    if (p[v] > 0.0 || v == target) candidates.push_back(v);
  std::sort(candidates.begin(), candidates.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (p[a] != p[b]) return p[a] > p[b];
    if ((a == target) != (b == target)) return a == target;  // target wins ties
    return a < b;
  });
  if (candidates.size() > k) {
    // keep the target even if k-th place pushed it out
    const auto pos = std::find(candidates.begin(), candidates.end(), target);
    const std::size_t idx = static_cast<std::size_t>(pos - candidates.begin());
    candidates.resize(k);
    if (idx >= k) candidates.back() = target;
  }

  PprResult res;
  res.ids = std::move(candidates);
  res.scores.reserve(res.ids.size());
  for (std::uint32_t v : res.ids) res.scores.push_back(p[v]);
  return res;
}

ComplexField assemble_input(const NodeSample& sample, const GridSpec& grid,
                            bool encode_score_on_phase) {
  const std::uint32_t n = grid.n;
  if (sample.k > n || sample.d > n)
    throw std::invalid_argument("feature block larger than grid");
  if (sample.rows.size() != static_cast<std::size_t>(sample.k) * sample.d)
    throw std::invalid_argument("sample row buffer does not match k*d");
  if (sample.scores.size() != sample.k)
    throw std::invalid_argument("sample score count does not match k");

  ComplexField f(n);
  const std::uint32_t row0 = (n - sample.k) / 2;
  const std::uint32_t col0 = (n - sample.d) / 2;
  for (std::uint32_t i = 0; i < sample.k; ++i) {
    const double phase = encode_score_on_phase
                             ? (std::numbers::pi / 2.0) * sample.scores[i]
                             : 0.0;
    const cdouble rot{std::cos(phase), std::sin(phase)};
    for (std::uint32_t j = 0; j < sample.d; ++j) {
      const double amp = sample.rows[static_cast<std::size_t>(i) * sample.d + j];
      if (amp < 0.0 || amp > 1.0)
        throw std::invalid_argument("amplitudes must lie in [0, 1]");
      if (amp != 0.0) f.at(row0 + i, col0 + j) = amp * rot;
    }
  }
  return f;
}

Split split(std::uint32_t num_nodes, std::uint32_t test_size, std::uint64_t seed) {
  if (test_size > num_nodes) throw std::invalid_argument("test size exceeds node count");
  std::vector<std::uint32_t> ids(num_nodes);
  for (std::uint32_t i = 0; i < num_nodes; ++i) ids[i] = i;
  Rng rng = Rng::stream(seed, "split");
  // partial Fisher-Yates: the first test_size entries become the test set
  for (std::uint32_t i = 0; i < test_size; ++i) {
    const std::uint32_t j = i + static_cast<std::uint32_t>(rng.next_below(num_nodes - i));
    std::swap(ids[i], ids[j]);
  }
  Split s;
  s.test_ids.assign(ids.begin(), ids.begin() + test_size);
  s.train_ids.assign(ids.begin() + test_size, ids.end());
  std::sort(s.test_ids.begin(), s.test_ids.end());
  std::sort(s.train_ids.begin(), s.train_ids.end());
  return s;
}

}  // namespace holograph
