#include "quantx/harness/experiment.hpp"

#include "quantx/harness/csv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <thread>

namespace quantx {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

GaussianClassSpec class_spec_from_json(const json& j) {
  GaussianClassSpec spec;
  spec.mean = j.at("mean").get<std::vector<double>>();
  if (j.at("sigma").is_number())
    spec.sigma = {j.at("sigma").get<double>()};
  else
    spec.sigma = j.at("sigma").get<std::vector<double>>();
  spec.count = j.at("count");
  return spec;
}

int resolved_threads(int threads) {
  if (threads > 0) return threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

ExperimentConfig parse_experiment_config(const json& j) {
  ExperimentConfig cfg;
  try {
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("metrics")) cfg.metrics = j.at("metrics").get<std::vector<std::string>>();
    const json& ds = j.at("dataset");
    if (ds.contains("lequa_dir")) {
      cfg.lequa_dir = fs::path(ds.at("lequa_dir").get<std::string>());
    } else if (ds.contains("synthetic")) {
      const json& s = ds.at("synthetic");
      SyntheticSpec spec;
      for (const json& c : s.at("classes")) spec.classes.push_back(class_spec_from_json(c));
      spec.train_bags = s.value("train_bags", 500);
      spec.train_bag_size = s.value("train_bag_size", 250);
      spec.test_bags = s.value("test_bags", 500);
      spec.test_bag_size = s.value("test_bag_size", 250);
      cfg.synthetic = std::move(spec);
    } else {
      fail(Errc::bad_config, "dataset must name lequa_dir or synthetic");
    }
    for (const json& m : j.at("methods")) {
      MethodSpec spec;
      spec.name = m.at("name");
      spec.preset = m.value("preset", std::string());
      if (m.contains("options")) spec.options = m.at("options").dump();
      cfg.methods.push_back(std::move(spec));
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(Errc::bad_config, std::string("bad experiment config: ") + e.what());
  }
  if (cfg.methods.empty()) fail(Errc::bad_config, "config lists no methods");
  if (cfg.metrics.empty()) fail(Errc::bad_config, "config lists no metrics");
  for (const std::string& m : cfg.metrics)
    if (m != "ae" && m != "rae") fail(Errc::bad_config, "unknown metric: " + m);
  return cfg;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::missing_file, "cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail(Errc::bad_config, path.string() + ": " + e.what());
  }
  return parse_experiment_config(j);
}

BenchmarkData prepare_benchmark_data(const ExperimentConfig& cfg) {
  if (cfg.lequa_dir) {
    LequaData data = load_lequa(*cfg.lequa_dir);
    if (data.test_prevalences.empty())
      fail(Errc::missing_file, "benchmarks need test prevalences to score against");
    return BenchmarkData{std::move(data.train), std::move(data.dev), std::move(data.test_bags),
                         std::move(data.test_prevalences)};
  }
  if (!cfg.synthetic) fail(Errc::bad_config, "no dataset configured");
  const SyntheticSpec& spec = *cfg.synthetic;

  LabeledDataset train = synth_dataset(spec.classes, cfg.seed);
  AppConfig train_app{spec.train_bag_size, spec.train_bags, cfg.seed ^ 0x5eedba65ULL};
  BagDataset train_bags = app_generate(train, train_app);

  // the test pool is drawn fresh so test bags never reuse training instances
  LabeledDataset test_pool = synth_dataset(spec.classes, cfg.seed ^ 0x7e57ULL);
  AppConfig test_app{spec.test_bag_size, spec.test_bags, cfg.seed ^ 0x7e57ba65ULL};
  BagDataset test = app_generate(test_pool, test_app);

  std::vector<Bag> test_bags(test.bags());
  std::vector<Prevalence> test_prevs(test.prevalences());
  return BenchmarkData{std::move(train), std::move(train_bags), std::move(test_bags),
                       std::move(test_prevs)};
}

bool is_neural_method(const std::string& name) {
  return name.rfind("histnet-", 0) == 0 || name.rfind("deepsets-", 0) == 0;
}

namespace {

AggregativeOptions aggregative_options_from_spec(const MethodSpec& spec, std::uint64_t seed) {
  AggregativeOptions opts;
  opts.classifier.seed = seed;
  if (spec.options.empty()) return opts;
  json j = json::parse(spec.options);
  opts.classifier.l2_lambda = j.value("l2_lambda", opts.classifier.l2_lambda);
  opts.classifier.max_iters = j.value("max_iters", opts.classifier.max_iters);
  opts.classifier.grad_tol = j.value("grad_tol", opts.classifier.grad_tol);
  opts.cv_folds = j.value("cv_folds", opts.cv_folds);
  opts.calibration_holdout = j.value("calibration_holdout", opts.calibration_holdout);
  opts.emq.max_iters = j.value("emq_max_iters", opts.emq.max_iters);
  opts.emq.tol = j.value("emq_tol", opts.emq.tol);
  if (j.contains("hdy_bin_counts"))
    opts.hdy_bin_counts = j.at("hdy_bin_counts").get<std::vector<int>>();
  opts.hdy_grid_step = j.value("hdy_grid_step", opts.hdy_grid_step);
  return opts;
}

NeuralMethodConfig neural_config_from_spec(const MethodSpec& spec, std::uint64_t seed) {
  NeuralMethodConfig cfg = neural_preset(spec.preset.empty() ? "desk" : spec.preset);
  const std::string tail = spec.name.substr(spec.name.find('-') + 1);
  if (spec.name.rfind("histnet-", 0) == 0) {
    cfg.net.invariant.is_histogram = true;
    cfg.net.invariant.variant = hist_variant_from_string(tail);
  } else {
    cfg.net.invariant.is_histogram = false;
    cfg.net.invariant.pool = pool_kind_from_string(tail);
  }
  cfg.train.seed = seed;
  if (spec.options.empty()) return cfg;
  json j = json::parse(spec.options);
  if (j.contains("feature_layers"))
    cfg.net.feature_layers = j.at("feature_layers").get<std::vector<int>>();
  if (j.contains("head_hidden")) cfg.net.head_hidden = j.at("head_hidden").get<std::vector<int>>();
  cfg.net.invariant.bins = j.value("bins", cfg.net.invariant.bins);
  cfg.net.feature_dropout = j.value("feature_dropout", cfg.net.feature_dropout);
  cfg.net.head_dropout = j.value("dropout", cfg.net.head_dropout);
  cfg.net.squash_features = j.value("squash_features", cfg.net.squash_features);
  cfg.train.learning_rate = j.value("learning_rate", cfg.train.learning_rate);
  cfg.train.weight_decay = j.value("weight_decay", cfg.train.weight_decay);
  cfg.train.batch_size = j.value("batch_size", cfg.train.batch_size);
  cfg.train.real_proportion = j.value("real_proportion", cfg.train.real_proportion);
  cfg.train.patience = j.value("patience", cfg.train.patience);
  cfg.train.max_epochs = j.value("max_epochs", cfg.train.max_epochs);
  cfg.train.validation_fraction = j.value("validation_fraction", cfg.train.validation_fraction);
  if (j.contains("loss")) cfg.train.loss = loss_kind_from_string(j.at("loss"));
  return cfg;
}

}  // namespace

QuantModel fit_method(const MethodSpec& spec, const LabeledDataset* train,
                      const BagDataset* train_bags, std::uint64_t seed) {
  QuantModel model;
  model.kind = spec.name;
  if (is_neural_method(spec.name)) {
    if (!train_bags || train_bags->size() == 0)
      fail(Errc::empty_dataset, spec.name + " needs prevalence-labeled training bags");
    NeuralMethodConfig cfg = neural_config_from_spec(spec, seed);
    cfg.net.input_dim = static_cast<int>(train_bags->bag(0).dim());
    cfg.net.n_outputs = train_bags->n_classes();
    model.n_classes = train_bags->n_classes();
    model.network = std::make_unique<QuantNetwork>(cfg.net, seed);
    train_network(*model.network, *train_bags, cfg.train);
    return model;
  }
  if (!train) fail(Errc::empty_dataset, spec.name + " needs instance-labeled training data");
  AggregativeOptions opts = aggregative_options_from_spec(spec, seed);
  model.n_classes = train->n_classes();
  model.aggregative = fit_aggregative(spec.name, *train, opts);
  return model;
}

std::vector<ResultRow> evaluate_model(const QuantModel& model, const std::vector<Bag>& bags,
                                      const std::vector<Prevalence>& gold, int threads) {
  if (bags.size() != gold.size())
    fail(Errc::length_mismatch, "test bags and test prevalences differ in count");
  std::vector<ResultRow> rows(bags.size());
  const int n_threads = std::min<int>(resolved_threads(threads), static_cast<int>(bags.size()));

  auto worker = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Prevalence estimate = model.quantify(bags[i]);
      rows[i].method = model.kind;
      rows[i].bag_id = static_cast<int>(i);
      rows[i].ae = absolute_error(gold[i], estimate);
      rows[i].rae = relative_absolute_error(gold[i], estimate,
                                            rae_epsilon(static_cast<std::size_t>(bags[i].size())));
    }
  };

  if (n_threads <= 1) {
    worker(0, bags.size());
    return rows;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (bags.size() + static_cast<std::size_t>(n_threads) - 1) /
                            static_cast<std::size_t>(n_threads);
  for (int t = 0; t < n_threads; ++t) {
    const std::size_t begin = static_cast<std::size_t>(t) * chunk;
    const std::size_t end = std::min(bags.size(), begin + chunk);
    if (begin >= end) break;
    pool.emplace_back(worker, begin, end);
  }
  for (auto& th : pool) th.join();
  return rows;
}

MethodSummary summarize(const std::string& method, const std::vector<ResultRow>& rows) {
  MethodSummary s;
  s.method = method;
  s.n_bags = static_cast<int>(rows.size());
  if (rows.empty()) return s;
  double ae_sum = 0.0, rae_sum = 0.0;
  for (const ResultRow& r : rows) {
    ae_sum += r.ae;
    rae_sum += r.rae;
  }
  s.ae_mean = ae_sum / s.n_bags;
  s.rae_mean = rae_sum / s.n_bags;
  double ae_var = 0.0, rae_var = 0.0;
  for (const ResultRow& r : rows) {
    ae_var += (r.ae - s.ae_mean) * (r.ae - s.ae_mean);
    rae_var += (r.rae - s.rae_mean) * (r.rae - s.rae_mean);
  }
  s.ae_std = std::sqrt(ae_var / s.n_bags);
  s.rae_std = std::sqrt(rae_var / s.n_bags);
  return s;
}

ResultTable run_benchmark(const ExperimentConfig& cfg, int threads) {
  BenchmarkData data = prepare_benchmark_data(cfg);
  ResultTable table;
  for (const MethodSpec& spec : cfg.methods) {
    try {
      QuantModel model = fit_method(spec, &data.train, &data.train_bags, cfg.seed);
      std::vector<ResultRow> rows =
          evaluate_model(model, data.test_bags, data.test_prevalences, threads);
      table.summaries.push_back(summarize(spec.name, rows));
      table.rows.insert(table.rows.end(), rows.begin(), rows.end());
    } catch (const Error& e) {
      MethodSummary failed;
      failed.method = spec.name;
      failed.error = e.what();
      table.summaries.push_back(std::move(failed));
    }
  }
  return table;
}

void report(const ResultTable& table, const std::string& format, const fs::path& out_dir) {
  if (table.summaries.empty()) fail(Errc::empty_input, "nothing to report");
  std::error_code ec;
  fs::create_directories(out_dir, ec);

  if (format == "csv") {
    std::ofstream per_bag(out_dir / "per_bag.csv");
    if (!per_bag) fail(Errc::io_error, "cannot write per_bag.csv");
    per_bag << "method,bag_id,ae,rae\n";
    for (const ResultRow& r : table.rows)
      per_bag << r.method << ',' << r.bag_id << ',' << format_double(r.ae) << ','
              << format_double(r.rae) << '\n';

    std::ofstream summary(out_dir / "summary.csv");
    if (!summary) fail(Errc::io_error, "cannot write summary.csv");
    summary << "method,n_bags,ae_mean,ae_std,rae_mean,rae_std,error\n";
    for (const MethodSummary& s : table.summaries)
      summary << s.method << ',' << s.n_bags << ',' << format_double(s.ae_mean) << ','
              << format_double(s.ae_std) << ',' << format_double(s.rae_mean) << ','
              << format_double(s.rae_std) << ',' << s.error << '\n';
    return;
  }
  if (format == "markdown") {
    std::vector<MethodSummary> sorted = table.summaries;
    std::stable_sort(sorted.begin(), sorted.end(), [](const MethodSummary& a, const MethodSummary& b) {
      if (a.error.empty() != b.error.empty()) return a.error.empty();
      return a.rae_mean < b.rae_mean;
    });
    std::ofstream md(out_dir / "summary.md");
    if (!md) fail(Errc::io_error, "cannot write summary.md");
    md << "| method | AE | RAE |\n|---|---|---|\n";
    char buf[128];
    for (const MethodSummary& s : sorted) {
      if (!s.error.empty()) {
        md << "| " << s.method << " | failed | " << s.error << " |\n";
        continue;
      }
      std::snprintf(buf, sizeof buf, "| %s | %.4f ± %.3f | %.4f ± %.3f |\n", s.method.c_str(),
                    s.ae_mean, s.ae_std, s.rae_mean, s.rae_std);
      md << buf;
    }
    return;
  }
  fail(Errc::bad_config, "unknown report format: " + format);
}

ResultTable bins_sweep(const ExperimentConfig& cfg, const std::vector<int>& bin_counts,
                       int threads) {
  if (bin_counts.empty()) fail(Errc::bad_config, "no bin counts to sweep");
  const MethodSpec* base = nullptr;
  for (const MethodSpec& m : cfg.methods)
    if (m.name.rfind("histnet-", 0) == 0) {
      base = &m;
      break;
    }
  if (!base) fail(Errc::bad_config, "bins sweep needs a histnet method in the config");

  BenchmarkData data = prepare_benchmark_data(cfg);
  ResultTable table;
  for (int bins : bin_counts) {
    MethodSpec spec = *base;
    json overrides = spec.options.empty() ? json::object() : json::parse(spec.options);
    overrides["bins"] = bins;
    spec.options = overrides.dump();
    const std::string label = spec.name + "[bins=" + std::to_string(bins) + "]";
    try {
      QuantModel model = fit_method(spec, &data.train, &data.train_bags, cfg.seed);
      std::vector<ResultRow> rows =
          evaluate_model(model, data.test_bags, data.test_prevalences, threads);
      for (ResultRow& r : rows) r.method = label;
      table.summaries.push_back(summarize(label, rows));
      table.rows.insert(table.rows.end(), rows.begin(), rows.end());
    } catch (const Error& e) {
      MethodSummary failed;
      failed.method = label;
      failed.error = e.what();
      table.summaries.push_back(std::move(failed));
    }
  }
  return table;
}

}  // namespace quantx
