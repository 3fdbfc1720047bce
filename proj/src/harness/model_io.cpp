#include "quantx/harness/model_io.hpp"

#include <fstream>

#include "json.hpp"

namespace quantx {

using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) fail(Errc::bad_config, "expected a matrix");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(j.at(0).size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != cols)
      fail(Errc::bad_config, "ragged matrix in model file");
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row.at(static_cast<std::size_t>(c));
  }
  return m;
}

json classifier_to_json(const SoftClassifier& clf) {
  json j;
  j["weights"] = matrix_to_json(clf.weights());
  j["biases"] = std::vector<double>(clf.biases().data(), clf.biases().data() + clf.biases().size());
  if (clf.calibration()) {
    j["calibration"] = {
        {"temperature", clf.calibration()->temperature},
        {"bias", std::vector<double>(clf.calibration()->bias.data(),
                                     clf.calibration()->bias.data() +
                                         clf.calibration()->bias.size())}};
  } else {
    j["calibration"] = nullptr;
  }
  return j;
}

SoftClassifier classifier_from_json(const json& j) {
  Matrix w = matrix_from_json(j.at("weights"));
  std::vector<double> b = j.at("biases").get<std::vector<double>>();
  Vector bias(static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < b.size(); ++i) bias(static_cast<Eigen::Index>(i)) = b[i];
  std::optional<Calibration> cal;
  if (j.contains("calibration") && !j.at("calibration").is_null()) {
    Calibration c;
    c.temperature = j.at("calibration").at("temperature");
    std::vector<double> cb = j.at("calibration").at("bias").get<std::vector<double>>();
    c.bias = Vector(static_cast<Eigen::Index>(cb.size()));
    for (std::size_t i = 0; i < cb.size(); ++i) c.bias(static_cast<Eigen::Index>(i)) = cb[i];
    cal = std::move(c);
  }
  return SoftClassifier(std::move(w), std::move(bias), std::move(cal));
}

json network_config_to_json(const NetworkConfig& cfg) {
  json inv;
  if (cfg.invariant.is_histogram) {
    inv = {{"type", "histogram"},
           {"variant", to_string(cfg.invariant.variant)},
           {"bins", cfg.invariant.bins},
           {"gamma", cfg.invariant.gamma}};
  } else {
    inv = {{"type", "pooling"}, {"pool", to_string(cfg.invariant.pool)}};
  }
  return json{{"input_dim", cfg.input_dim},
              {"feature_layers", cfg.feature_layers},
              {"invariant", inv},
              {"head_hidden", cfg.head_hidden},
              {"n_outputs", cfg.n_outputs},
              {"softmax_output", cfg.softmax_output},
              {"squash_features", cfg.squash_features},
              {"feature_dropout", cfg.feature_dropout},
              {"head_dropout", cfg.head_dropout},
              {"leaky_slope", cfg.leaky_slope}};
}

NetworkConfig network_config_from_json(const json& j) {
  NetworkConfig cfg;
  cfg.input_dim = j.at("input_dim");
  cfg.feature_layers = j.at("feature_layers").get<std::vector<int>>();
  const json& inv = j.at("invariant");
  if (inv.at("type") == "histogram") {
    cfg.invariant.is_histogram = true;
    cfg.invariant.variant = hist_variant_from_string(inv.at("variant"));
    cfg.invariant.bins = inv.at("bins");
    cfg.invariant.gamma = inv.value("gamma", 100.0);
  } else {
    cfg.invariant.is_histogram = false;
    cfg.invariant.pool = pool_kind_from_string(inv.at("pool"));
  }
  cfg.head_hidden = j.at("head_hidden").get<std::vector<int>>();
  cfg.n_outputs = j.at("n_outputs");
  cfg.softmax_output = j.at("softmax_output");
  cfg.squash_features = j.at("squash_features");
  cfg.feature_dropout = j.at("feature_dropout");
  cfg.head_dropout = j.at("head_dropout");
  cfg.leaky_slope = j.at("leaky_slope");
  return cfg;
}

}  // namespace

Prevalence QuantModel::quantify(const Bag& bag) const {
  if (aggregative) return aggregative->quantify(bag);
  if (network) return network->quantify(bag);
  fail(Errc::bad_config, "model holds no quantifier");
}

void save_model(const QuantModel& model, const std::filesystem::path& path) {
  json j;
  j["schema"] = 1;
  j["kind"] = model.kind;
  j["classes"] = model.n_classes;
  if (model.aggregative) {
    j["classifier"] = classifier_to_json(model.aggregative->classifier());
    AggregativeParts parts = aggregative_parts(*model.aggregative);
    if (parts.confusion) j["confusion"] = matrix_to_json(parts.confusion->entries());
    if (parts.train_prior) j["train_prior"] = parts.train_prior->values();
    if (parts.emq)
      j["emq"] = {{"max_iters", parts.emq->max_iters},
                  {"tol", parts.emq->tol},
                  {"use_calibration", parts.emq->use_calibration}};
    if (parts.hdy)
      j["hdy"] = {{"bin_counts", parts.hdy->bin_counts},
                  {"grid_step", parts.hdy->grid_step},
                  {"pos_histograms", parts.hdy->pos_histograms},
                  {"neg_histograms", parts.hdy->neg_histograms}};
  } else if (model.network) {
    j["network"] = {{"config", network_config_to_json(model.network->config())},
                    {"parameters", model.network->export_parameters()}};
  } else {
    fail(Errc::bad_config, "refusing to save an empty model");
  }
  std::ofstream out(path);
  if (!out) fail(Errc::io_error, "cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) fail(Errc::io_error, "failed while writing " + path.string());
}

QuantModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::missing_file, "cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail(Errc::bad_config, path.string() + ": " + e.what());
  }
  try {
    if (j.at("schema") != 1)
      fail(Errc::bad_config, "unsupported model schema " + j.at("schema").dump());
    QuantModel model;
    model.kind = j.at("kind");
    model.n_classes = j.at("classes");
    if (j.contains("network")) {
      NetworkConfig cfg = network_config_from_json(j.at("network").at("config"));
      model.network = std::make_unique<QuantNetwork>(cfg, 0);
      model.network->import_parameters(
          j.at("network").at("parameters").get<std::vector<std::vector<double>>>());
      return model;
    }
    SoftClassifier clf = classifier_from_json(j.at("classifier"));
    std::optional<MisclassificationMatrix> confusion;
    if (j.contains("confusion"))
      confusion = MisclassificationMatrix(matrix_from_json(j.at("confusion")));
    std::optional<Prevalence> prior;
    if (j.contains("train_prior"))
      prior = make_prevalence(j.at("train_prior").get<std::vector<double>>());
    std::optional<EmqOptions> emq;
    if (j.contains("emq")) {
      EmqOptions e;
      e.max_iters = j.at("emq").at("max_iters");
      e.tol = j.at("emq").at("tol");
      e.use_calibration = j.at("emq").at("use_calibration");
      emq = e;
    }
    std::optional<HdyModel> hdy;
    if (j.contains("hdy")) {
      HdyModel h;
      h.bin_counts = j.at("hdy").at("bin_counts").get<std::vector<int>>();
      h.grid_step = j.at("hdy").at("grid_step");
      h.pos_histograms = j.at("hdy").at("pos_histograms").get<std::vector<std::vector<double>>>();
      h.neg_histograms = j.at("hdy").at("neg_histograms").get<std::vector<std::vector<double>>>();
      hdy = std::move(h);
    }
    QuantModel out;
    out.kind = model.kind;
    out.n_classes = model.n_classes;
    out.aggregative = assemble_aggregative(out.kind, std::move(clf), std::move(confusion),
                                           std::move(prior), emq, std::move(hdy));
    return out;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(Errc::bad_config, path.string() + ": " + e.what());
  }
}

}  // namespace quantx
