#include "hetedge/fusion.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "hetedge/eval.hpp"
#include "hetedge/parallel.hpp"

namespace hetedge {

void TrainConfig::validate() const {
  if (batch_size < 1) throw Error("train config: batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw Error("train config: learning_rate must be positive");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw Error("train config: validation_fraction must be in [0, 1)");
  }
}

namespace {

constexpr std::uint64_t kShuffleStream = 0x73687566ULL;  // "shuf"
constexpr std::uint64_t kSplitStream = 0x73706c74ULL;    // "splt"
constexpr std::uint64_t kGlorotStream = 0x676c6f72ULL;   // "glor"

/// -[y log p + (1-y) log(1-p)] from the logit.
double bce(double logit, int label) { return label != 0 ? -log_sigmoid(logit) : -log_sigmoid(-logit); }

void require_both_classes(const FeatureSet& fs, std::string_view who) {
  std::size_t pos = 0;
  for (const auto& p : fs.pairs) pos += p.label != 0 ? 1 : 0;
  if (pos == 0 || pos == fs.rows()) {
    throw Error(std::string(who) + ": training labels contain a single class; AUC would be undefined");
  }
}

std::vector<std::size_t> all_rows(const FeatureSet& fs, std::span<const std::size_t> rows) {
  if (!rows.empty()) return {rows.begin(), rows.end()};
  std::vector<std::size_t> r(fs.rows());
  std::iota(r.begin(), r.end(), std::size_t{0});
  return r;
}

template <typename Fn>
void for_each_batch(std::vector<std::size_t>& rows, const TrainConfig& cfg, std::size_t epoch, Fn&& fn) {
  Rng rng(derive_seed(cfg.seed, kShuffleStream, epoch));
  std::shuffle(rows.begin(), rows.end(), rng);
  for (std::size_t b = 0; b < rows.size(); b += cfg.batch_size) {
    const std::size_t e = std::min(rows.size(), b + cfg.batch_size);
    fn(std::span<const std::size_t>(rows.data() + b, e - b));
  }
}

}  // namespace

// -------------------------------------------------------- logistic regression

double LogRegModel::logit(std::span<const double> x) const {
  if (x.size() != weights.size()) {
    throw Error("logreg: feature length " + std::to_string(x.size()) + " does not match model width " +
                std::to_string(weights.size()));
  }
  double z = bias;
  for (std::size_t i = 0; i < x.size(); ++i) z += weights[i] * x[i];
  return z;
}

double logreg_loss(const LogRegModel& m, const FeatureSet& fs) {
  double loss = 0.0;
  for (std::size_t i = 0; i < fs.rows(); ++i) loss += bce(m.logit(fs.row(i)), fs.pairs[i].label);
  return fs.rows() ? loss / static_cast<double>(fs.rows()) : 0.0;
}

namespace {
/// Accumulates the summed gradient over `rows` into g; returns the summed loss.
double logreg_accumulate(const LogRegModel& m, const FeatureSet& fs, std::span<const std::size_t> rows,
                         LogRegGradient& g) {
  double loss = 0.0;
  for (std::size_t r : rows) {
    auto x = fs.row(r);
    const double z = m.logit(x);
    const int y = fs.pairs[r].label;
    loss += bce(z, y);
    const double dz = sigmoid(z) - (y != 0 ? 1.0 : 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) g.weights[i] += dz * x[i];
    g.bias += dz;
  }
  return loss;
}
}  // namespace

LogRegGradient logreg_gradient(const LogRegModel& m, const FeatureSet& fs) {
  LogRegGradient g{std::vector<double>(m.weights.size(), 0.0), 0.0};
  const auto rows = all_rows(fs, {});
  logreg_accumulate(m, fs, rows, g);
  const double scale = fs.rows() ? 1.0 / static_cast<double>(fs.rows()) : 0.0;
  for (auto& w : g.weights) w *= scale;
  g.bias *= scale;
  return g;
}

LogRegModel train_logreg(const FeatureSet& fs, const TrainConfig& cfg, TrainReport* report) {
  cfg.validate();
  require_both_classes(fs, "train_logreg");
  LogRegModel m(fs.width());
  auto rows = all_rows(fs, {});
  if (report) *report = {};
  LogRegGradient g{std::vector<double>(m.weights.size()), 0.0};
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    double epoch_loss = 0.0;
    for_each_batch(rows, cfg, epoch, [&](std::span<const std::size_t> batch) {
      std::fill(g.weights.begin(), g.weights.end(), 0.0);
      g.bias = 0.0;
      epoch_loss += logreg_accumulate(m, fs, batch, g);
      const double step = cfg.learning_rate / static_cast<double>(batch.size());
      for (std::size_t i = 0; i < m.weights.size(); ++i) m.weights[i] -= step * g.weights[i];
      m.bias -= step * g.bias;
    });
    epoch_loss /= static_cast<double>(rows.size());
    if (!std::isfinite(epoch_loss)) {
      throw DivergenceError("train_logreg: non-finite loss in epoch " + std::to_string(epoch));
    }
    if (report) {
      report->train_loss.push_back(epoch_loss);
      report->best_epoch = epoch;
    }
  }
  return m;
}

// --------------------------------------------------------- multi-tower network

MultiTowerNet::MultiTowerNet(std::vector<std::size_t> tower_inputs, std::size_t hidden) {
  if (tower_inputs.empty()) throw Error("multi-tower net: at least one tower required");
  if (hidden == 0) throw Error("multi-tower net: hidden width must be positive");
  for (std::size_t in : tower_inputs) {
    if (in == 0) throw Error("multi-tower net: tower input width must be positive");
    towers.emplace_back(in, hidden);
  }
  fusion = DenseLayer(tower_inputs.size() * hidden, hidden);
  output = DenseLayer(hidden, 1);
}

void MultiTowerNet::init_glorot(std::uint64_t seed) {
  Rng rng(derive_seed(seed, kGlorotStream));
  for (DenseLayer* l : layers()) {
    const double limit = std::sqrt(6.0 / static_cast<double>(l->in + l->out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (auto& w : l->weight) w = dist(rng);
    std::fill(l->bias.begin(), l->bias.end(), 0.0);
  }
}

std::size_t MultiTowerNet::input_width() const noexcept {
  std::size_t w = 0;
  for (const auto& t : towers) w += t.in;
  return w;
}

std::vector<std::size_t> MultiTowerNet::tower_inputs() const {
  std::vector<std::size_t> out;
  for (const auto& t : towers) out.push_back(t.in);
  return out;
}

std::size_t MultiTowerNet::parameter_count() const noexcept {
  std::size_t n = fusion.parameter_count() + output.parameter_count();
  for (const auto& t : towers) n += t.parameter_count();
  return n;
}

std::vector<DenseLayer*> MultiTowerNet::layers() {
  std::vector<DenseLayer*> out;
  for (auto& t : towers) out.push_back(&t);
  out.push_back(&fusion);
  out.push_back(&output);
  return out;
}

std::vector<const DenseLayer*> MultiTowerNet::layers() const {
  std::vector<const DenseLayer*> out;
  for (const auto& t : towers) out.push_back(&t);
  out.push_back(&fusion);
  out.push_back(&output);
  return out;
}

namespace {

/// Activations kept for backpropagation.
struct Activations {
  std::vector<double> towers;  // T * hidden, post-ReLU
  std::vector<double> fused;   // hidden, post-ReLU
  double logit = 0.0;
};

void dense_relu(const DenseLayer& l, const double* x, double* y) {
  for (std::size_t o = 0; o < l.out; ++o) {
    const double* w = l.weight.data() + o * l.in;
    double s = l.bias[o];
    for (std::size_t i = 0; i < l.in; ++i) s += w[i] * x[i];
    y[o] = s > 0.0 ? s : 0.0;
  }
}

void forward_into(const MultiTowerNet& net, std::span<const double> x, Activations& a) {
  if (x.size() != net.input_width()) {
    throw Error("multi-tower net: feature length " + std::to_string(x.size()) + " does not match towers (" +
                std::to_string(net.input_width()) + ")");
  }
  const std::size_t h = net.hidden();
  a.towers.resize(net.num_towers() * h);
  a.fused.resize(h);
  std::size_t offset = 0;
  for (std::size_t t = 0; t < net.num_towers(); ++t) {
    dense_relu(net.towers[t], x.data() + offset, a.towers.data() + t * h);
    offset += net.towers[t].in;
  }
  dense_relu(net.fusion, a.towers.data(), a.fused.data());
  double z = net.output.bias[0];
  for (std::size_t i = 0; i < h; ++i) z += net.output.weight[i] * a.fused[i];
  a.logit = z;
}

/// Adds d(loss)/d(params) for one sample to `g`; returns the sample loss.
double backprop_sample(const MultiTowerNet& net, std::span<const double> x, int label, Activations& a,
                       std::vector<double>& d_fused, std::vector<double>& d_towers, MultiTowerNet& g) {
  forward_into(net, x, a);
  const std::size_t h = net.hidden();
  const double loss = bce(a.logit, label);
  const double dz = sigmoid(a.logit) - (label != 0 ? 1.0 : 0.0);

  // output layer
  for (std::size_t i = 0; i < h; ++i) g.output.weight[i] += dz * a.fused[i];
  g.output.bias[0] += dz;

  // fusion layer: gradient w.r.t. pre-activation
  d_fused.assign(h, 0.0);
  for (std::size_t i = 0; i < h; ++i) d_fused[i] = a.fused[i] > 0.0 ? dz * net.output.weight[i] : 0.0;
  const std::size_t fin = net.fusion.in;
  d_towers.assign(fin, 0.0);
  for (std::size_t o = 0; o < h; ++o) {
    const double d = d_fused[o];
    if (d == 0.0) continue;
    double* gw = g.fusion.weight.data() + o * fin;
    const double* w = net.fusion.weight.data() + o * fin;
    for (std::size_t i = 0; i < fin; ++i) {
      gw[i] += d * a.towers[i];
      d_towers[i] += d * w[i];
    }
    g.fusion.bias[o] += d;
  }

  // towers
  std::size_t offset = 0;
  for (std::size_t t = 0; t < net.num_towers(); ++t) {
    const DenseLayer& layer = net.towers[t];
    DenseLayer& gl = g.towers[t];
    const double* xt = x.data() + offset;
    for (std::size_t o = 0; o < h; ++o) {
      const std::size_t k = t * h + o;
      if (a.towers[k] <= 0.0) continue;
      const double d = d_towers[k];
      double* gw = gl.weight.data() + o * layer.in;
      for (std::size_t i = 0; i < layer.in; ++i) gw[i] += d * xt[i];
      gl.bias[o] += d;
    }
    offset += layer.in;
  }
  return loss;
}

MultiTowerNet zero_like(const MultiTowerNet& net) { return MultiTowerNet(net.tower_inputs(), net.hidden()); }

void check_layout(const MultiTowerNet& net, const FeatureSet& fs) {
  if (fs.block_sizes != net.tower_inputs()) {
    throw Error("multi-tower net: feature blocks do not match tower input sizes");
  }
}

}  // namespace

MultiTowerNet::Output MultiTowerNet::forward(std::span<const double> features) const {
  Activations a;
  forward_into(*this, features, a);
  return {a.logit, sigmoid(a.logit), std::move(a.fused)};
}

MultiTowerNet::Output MultiTowerNet::forward(const HeteroEdgeFeatures& features) const {
  if (features.blocks.size() != towers.size()) {
    throw Error("multi-tower net: expected " + std::to_string(towers.size()) + " edge vectors, got " +
                std::to_string(features.blocks.size()));
  }
  for (std::size_t t = 0; t < towers.size(); ++t) {
    if (features.blocks[t].values.size() != towers[t].in) {
      throw Error("multi-tower net: edge vector " + std::to_string(t) + " has length " +
                  std::to_string(features.blocks[t].values.size()) + ", tower expects " +
                  std::to_string(towers[t].in));
    }
  }
  return forward(features.flatten());
}

double mtn_loss(const MultiTowerNet& net, const FeatureSet& fs, std::span<const std::size_t> rows) {
  check_layout(net, fs);
  const auto r = all_rows(fs, rows);
  Activations a;
  double loss = 0.0;
  for (std::size_t i : r) {
    forward_into(net, fs.row(i), a);
    loss += bce(a.logit, fs.pairs[i].label);
  }
  return r.empty() ? 0.0 : loss / static_cast<double>(r.size());
}

MultiTowerNet mtn_gradient(const MultiTowerNet& net, const FeatureSet& fs, std::span<const std::size_t> rows,
                           double* loss_out) {
  check_layout(net, fs);
  const auto r = all_rows(fs, rows);
  MultiTowerNet g = zero_like(net);
  Activations a;
  std::vector<double> d_fused, d_towers;
  double loss = 0.0;
  for (std::size_t i : r) loss += backprop_sample(net, fs.row(i), fs.pairs[i].label, a, d_fused, d_towers, g);
  const double scale = r.empty() ? 0.0 : 1.0 / static_cast<double>(r.size());
  for (DenseLayer* l : g.layers()) {
    for (auto& w : l->weight) w *= scale;
    for (auto& b : l->bias) b *= scale;
  }
  if (loss_out) *loss_out = loss * scale;
  return g;
}

MultiTowerNet train_mtn(const FeatureSet& fs, const TrainConfig& cfg, std::size_t hidden, TrainReport* report) {
  cfg.validate();
  require_both_classes(fs, "train_mtn");
  MultiTowerNet net(fs.block_sizes, hidden);
  net.init_glorot(cfg.seed);

  // Stratified hold-out for model selection.
  std::vector<std::size_t> train_rows, val_rows;
  {
    Rng rng(derive_seed(cfg.seed, kSplitStream));
    for (int cls : {1, 0}) {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < fs.rows(); ++i) {
        if ((fs.pairs[i].label != 0) == (cls != 0)) idx.push_back(i);
      }
      std::shuffle(idx.begin(), idx.end(), rng);
      const auto n_val = static_cast<std::size_t>(std::llround(cfg.validation_fraction * static_cast<double>(idx.size())));
      val_rows.insert(val_rows.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_val));
      train_rows.insert(train_rows.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_val), idx.end());
    }
    std::size_t val_pos = 0;
    for (std::size_t i : val_rows) val_pos += fs.pairs[i].label != 0 ? 1 : 0;
    if (val_pos == 0 || val_pos == val_rows.size()) {
      train_rows.insert(train_rows.end(), val_rows.begin(), val_rows.end());
      val_rows.clear();
    }
    std::sort(train_rows.begin(), train_rows.end());
  }

  std::vector<int> val_labels;
  for (std::size_t i : val_rows) val_labels.push_back(fs.pairs[i].label);

  if (report) *report = {};
  MultiTowerNet best = net;
  double best_auc = -1.0;
  MultiTowerNet g = zero_like(net);
  Activations a;
  std::vector<double> d_fused, d_towers, val_scores(val_rows.size());

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    double epoch_loss = 0.0;
    for_each_batch(train_rows, cfg, epoch, [&](std::span<const std::size_t> batch) {
      for (DenseLayer* l : g.layers()) {
        std::fill(l->weight.begin(), l->weight.end(), 0.0);
        std::fill(l->bias.begin(), l->bias.end(), 0.0);
      }
      for (std::size_t i : batch) {
        epoch_loss += backprop_sample(net, fs.row(i), fs.pairs[i].label, a, d_fused, d_towers, g);
      }
      const double step = cfg.learning_rate / static_cast<double>(batch.size());
      auto params = net.layers();
      auto grads = g.layers();
      for (std::size_t l = 0; l < params.size(); ++l) {
        for (std::size_t k = 0; k < params[l]->weight.size(); ++k) params[l]->weight[k] -= step * grads[l]->weight[k];
        for (std::size_t k = 0; k < params[l]->bias.size(); ++k) params[l]->bias[k] -= step * grads[l]->bias[k];
      }
    });
    epoch_loss /= static_cast<double>(std::max<std::size_t>(1, train_rows.size()));
    if (!std::isfinite(epoch_loss)) {
      throw DivergenceError("train_mtn: non-finite loss in epoch " + std::to_string(epoch) +
                            "; lower train.learning_rate");
    }
    if (report) report->train_loss.push_back(epoch_loss);

    if (val_rows.empty()) {
      best = net;
      if (report) report->best_epoch = epoch;
      continue;
    }
    for (std::size_t k = 0; k < val_rows.size(); ++k) {
      forward_into(net, fs.row(val_rows[k]), a);
      val_scores[k] = a.logit;
    }
    const double val_auc = auc(val_scores, val_labels);
    if (report) report->val_auc.push_back(val_auc);
    if (val_auc > best_auc) {
      best_auc = val_auc;
      best = net;
      if (report) report->best_epoch = epoch;
    }
  }
  return best;
}

// ---------------------------------------------------------------- prediction

double predict(const FusionModel& model, std::span<const double> features) {
  return std::visit([&](const auto& m) { return m.predict(features); }, model);
}

double predict(const FusionModel& model, const HeteroEdgeFeatures& features) {
  if (const auto* net = std::get_if<MultiTowerNet>(&model)) return net->forward(features).probability;
  return predict(model, features.flatten());
}

std::vector<double> predict_all(const FusionModel& model, const FeatureSet& fs, int threads) {
  if (const auto* net = std::get_if<MultiTowerNet>(&model)) check_layout(*net, fs);
  std::vector<double> out(fs.rows());
  const auto n = static_cast<std::ptrdiff_t>(fs.rows());
#pragma omp parallel for schedule(static) num_threads(resolve_threads(threads)) if (threads != 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = predict(model, fs.row(static_cast<std::size_t>(i)));
  }
  return out;
}

// ---------------------------------------------------------------- model file

namespace {

constexpr std::string_view kModelMagic = "HETEDGE-MODEL v1";

void write_layer(std::ostream& out, std::string_view name, const DenseLayer& l) {
  out << "layer " << name << ' ' << l.out << ' ' << l.in << '\n';
  for (std::size_t o = 0; o < l.out; ++o) {
    out << 'w';
    for (std::size_t i = 0; i < l.in; ++i) out << ' ' << format_double(l.w(o, i));
    out << '\n';
  }
  out << 'b';
  for (double b : l.bias) out << ' ' << format_double(b);
  out << '\n';
}

class ModelReader {
 public:
  explicit ModelReader(std::istream& in) : in_(in) {}

  std::string line() {
    std::string l;
    if (!std::getline(in_, l)) throw ParseError(lineno_ + 1, "model: unexpected end of file");
    ++lineno_;
    return l;
  }

  /// Reads `key rest...` and returns rest.
  std::string keyed(std::string_view key) {
    const std::string l = line();
    if (l.rfind(std::string(key) + ' ', 0) != 0 && l != key) {
      throw ParseError(lineno_, "model: expected '" + std::string(key) + "'");
    }
    return l.size() > key.size() ? l.substr(key.size() + 1) : std::string();
  }

  std::vector<double> numbers(char tag, std::size_t count) {
    const std::string l = line();
    if (l.empty() || l.front() != tag) throw ParseError(lineno_, std::string("model: expected '") + tag + "' row");
    std::vector<double> out;
    out.reserve(count);
    const char* p = l.data() + 1;
    const char* end = l.data() + l.size();
    while (p < end) {
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      double v = 0.0;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc{}) throw ParseError(lineno_, "model: bad number");
      out.push_back(v);
      p = next;
    }
    if (out.size() != count) throw ParseError(lineno_, "model: expected " + std::to_string(count) + " values");
    return out;
  }

  DenseLayer layer(std::string_view name, std::size_t out, std::size_t in) {
    std::istringstream is(keyed("layer"));
    std::string n;
    std::size_t o = 0, i = 0;
    is >> n >> o >> i;
    if (n != name || o != out || i != in) {
      throw ParseError(lineno_, "model: layer '" + std::string(name) + "' has unexpected shape");
    }
    DenseLayer l(in, out);
    for (std::size_t r = 0; r < out; ++r) {
      auto row = numbers('w', in);
      std::copy(row.begin(), row.end(), l.weight.begin() + static_cast<std::ptrdiff_t>(r * in));
    }
    l.bias = numbers('b', out);
    return l;
  }

 private:
  std::istream& in_;
  std::size_t lineno_ = 0;
};

}  // namespace

void write_model(std::ostream& out, const SavedModel& m) {
  out << kModelMagic << '\n';
  out << "kind " << (std::holds_alternative<MultiTowerNet>(m.model) ? "mtn" : "logreg") << '\n';
  out << "combiner " << to_string(m.combiner) << '\n';
  out << "spaces " << m.spaces.size();
  for (const auto& s : m.spaces) out << ' ' << s;
  out << "\nblocks";
  for (auto b : m.block_sizes) out << ' ' << b;
  out << "\nprovenance " << hex64(m.provenance) << '\n';
  if (const auto* net = std::get_if<MultiTowerNet>(&m.model)) {
    out << "hidden " << net->hidden() << '\n';
    for (std::size_t t = 0; t < net->num_towers(); ++t) write_layer(out, "tower" + std::to_string(t), net->towers[t]);
    write_layer(out, "fusion", net->fusion);
    write_layer(out, "output", net->output);
  } else {
    const auto& lr = std::get<LogRegModel>(m.model);
    DenseLayer l(lr.weights.size(), 1);
    l.weight = lr.weights;
    l.bias = {lr.bias};
    write_layer(out, "linear", l);
  }
}

SavedModel read_model(std::istream& in) {
  ModelReader r(in);
  if (r.line() != kModelMagic) {
    throw FormatError("model: missing or unsupported header (expected '" + std::string(kModelMagic) + "')");
  }
  SavedModel m;
  const std::string kind = r.keyed("kind");
  if (kind != "mtn" && kind != "logreg") throw FormatError("model: unknown kind '" + kind + "'");
  m.combiner = parse_combiner(r.keyed("combiner"));
  {
    std::istringstream is(r.keyed("spaces"));
    std::size_t n = 0;
    is >> n;
    m.spaces.resize(n);
    for (auto& s : m.spaces) is >> s;
    if (!is) throw FormatError("model: bad spaces line");
  }
  {
    std::istringstream is(r.keyed("blocks"));
    std::size_t b = 0;
    while (is >> b) m.block_sizes.push_back(b);
    if (m.block_sizes.size() != m.spaces.size()) throw FormatError("model: block count does not match spaces");
  }
  m.provenance = std::stoull(r.keyed("provenance"), nullptr, 16);
  const std::size_t width = std::accumulate(m.block_sizes.begin(), m.block_sizes.end(), std::size_t{0});
  if (kind == "mtn") {
    const std::size_t hidden = std::stoull(r.keyed("hidden"));
    MultiTowerNet net(m.block_sizes, hidden);
    for (std::size_t t = 0; t < net.num_towers(); ++t) {
      net.towers[t] = r.layer("tower" + std::to_string(t), hidden, m.block_sizes[t]);
    }
    net.fusion = r.layer("fusion", hidden, hidden * m.block_sizes.size());
    net.output = r.layer("output", 1, hidden);
    m.model = std::move(net);
  } else {
    DenseLayer l = r.layer("linear", 1, width);
    LogRegModel lr;
    lr.weights = std::move(l.weight);
    lr.bias = l.bias[0];
    m.model = std::move(lr);
  }
  return m;
}

}  // namespace hetedge
