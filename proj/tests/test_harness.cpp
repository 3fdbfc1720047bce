#include <algorithm>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "quantx/harness/csv.hpp"
#include "quantx/harness/experiment.hpp"
#include "quantx/harness/toy.hpp"

using namespace quantx;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("quantx_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p);
  out << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

ExperimentConfig small_synth_config(std::vector<MethodSpec> methods) {
  ExperimentConfig cfg;
  SyntheticSpec spec;
  spec.classes = {{{-1.0}, {0.2}, 300}, {{1.0}, {0.2}, 300}};
  spec.train_bags = 20;
  spec.train_bag_size = 30;
  spec.test_bags = 10;
  spec.test_bag_size = 30;
  cfg.synthetic = spec;
  cfg.methods = std::move(methods);
  cfg.seed = 7;
  return cfg;
}

}  // namespace

TEST_CASE("load_lequa reads the directory layout") {
  TempDir dir("lequa");
  write_file(dir.path / "training_data.csv", "label,f_0,f_1,f_2\n0,0.1,0.2,0.3\n1,0.5,0.6,0.7\n");
  write_file(dir.path / "dev_samples/0.csv", "f_0,f_1,f_2\n0.1,0.2,0.3\n0.4,0.5,0.6\n");
  write_file(dir.path / "dev_samples/1.csv", "0.7,0.8,0.9\n");
  write_file(dir.path / "dev_prevalences.csv", "id,p_0,p_1\n0,0.5,0.5\n1,1.0,0.0\n");
  write_file(dir.path / "test_samples/0.csv", "0.2,0.3,0.4\n");
  write_file(dir.path / "test_prevalences.csv", "0,0.0,1.0\n");

  LequaData data = load_lequa(dir.path);
  CHECK(data.train.size() == 2);
  CHECK(data.train.dim() == 3);
  CHECK(data.train.n_classes() == 2);
  CHECK(data.dev.size() == 2);
  CHECK(data.dev.bag(0).size() == 2);
  CHECK(data.dev.prevalence(0)[0] == 0.5);
  CHECK(data.dev.prevalence(1)[0] == 1.0);
  CHECK(data.test_bags.size() == 1);
  REQUIRE(data.test_prevalences.size() == 1);
  CHECK(data.test_prevalences[0][1] == 1.0);
}

TEST_CASE("load_lequa failure modes") {
  TempDir dir("lequa_bad");
  CHECK_THROWS_AS(load_lequa(dir.path / "nope"), Error);

  write_file(dir.path / "training_data.csv", "0,0.1\n1,0.2\n");
  write_file(dir.path / "dev_samples/0.csv", "0.1\n");
  write_file(dir.path / "dev_prevalences.csv", "0,0.6,0.3\n");  // sums to 0.9
  write_file(dir.path / "test_samples/0.csv", "0.1\n");
  try {
    load_lequa(dir.path);
    FAIL("expected an off-simplex error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::prevalence_off_simplex);
  }

  // a malformed row reports its file and line number
  write_file(dir.path / "dev_prevalences.csv", "0,0.5,0.5\n");
  write_file(dir.path / "dev_samples/0.csv", "0.1\nnot_a_number\n");
  try {
    load_lequa(dir.path);
    FAIL("expected a malformed row error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::malformed_row);
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
}

TEST_CASE("manifest overrides the default paths") {
  TempDir dir("lequa_manifest");
  write_file(dir.path / "train.csv", "0,0.1\n1,0.9\n");
  write_file(dir.path / "bags/0.csv", "0.5\n");
  write_file(dir.path / "bag_p.csv", "0,1.0,0.0\n");
  write_file(dir.path / "tbags/0.csv", "0.5\n");
  write_file(dir.path / "manifest.json",
             R"({"training_data":"train.csv","dev_samples":"bags","dev_prevalences":"bag_p.csv",)"
             R"("test_samples":"tbags"})");
  LequaData data = load_lequa(dir.path);
  CHECK(data.train.size() == 2);
  CHECK(data.dev.size() == 1);
  CHECK(data.test_bags.size() == 1);
  CHECK(data.test_prevalences.empty());
}

TEST_CASE("bag generation round-trips through the loader byte-identically") {
  TempDir dir("roundtrip");
  LabeledDataset data = synth_dataset({{{-1.0}, {0.5}, 50}, {{1.0}, {0.5}, 50}}, 3);
  save_labeled_csv(data, dir.path / "training_data.csv");

  AppConfig app;
  app.bag_size = 10;
  app.bag_count = 3;
  app.seed = 99;
  BagDataset dev = app_generate(data, app);
  save_bagset(dev, dir.path, "dev");
  app.seed = 100;
  BagDataset test = app_generate(data, app);
  save_bagset(test, dir.path, "test");

  LequaData loaded = load_lequa(dir.path);
  REQUIRE(loaded.dev.size() == 3);
  for (std::size_t i = 0; i < dev.size(); ++i) {
    CHECK(loaded.dev.prevalence(i) == dev.prevalence(i));  // exact, not approximate
    CHECK(loaded.dev.bag(i).instances() == dev.bag(i).instances());
  }
  REQUIRE(loaded.test_prevalences.size() == 3);

  // regenerating with the same seed produces byte-identical files
  TempDir dir2("roundtrip2");
  app.seed = 99;
  BagDataset again = app_generate(data, app);
  save_bagset(again, dir2.path, "dev");
  CHECK(read_file(dir.path / "dev_prevalences.csv") == read_file(dir2.path / "dev_prevalences.csv"));
  CHECK(read_file(dir.path / "dev_samples/0.csv") == read_file(dir2.path / "dev_samples/0.csv"));
}

TEST_CASE("run_benchmark on a separable synthetic problem") {
  ExperimentConfig cfg = small_synth_config({{"cc", "", ""}, {"pcc", "", ""}});
  ResultTable table = run_benchmark(cfg, 1);
  REQUIRE(table.summaries.size() == 2);
  CHECK(table.rows.size() == 20);  // 2 methods x 10 bags
  for (const MethodSummary& s : table.summaries) {
    CHECK(s.error.empty());
    CHECK(s.ae_mean < 0.02);  // near-perfect classifier
  }

  // determinism: identical config, identical table
  ResultTable again = run_benchmark(cfg, 1);
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    CHECK(table.rows[i].ae == again.rows[i].ae);
    CHECK(table.rows[i].rae == again.rows[i].rae);
  }
}

TEST_CASE("evaluation is invariant to the thread count") {
  ExperimentConfig cfg = small_synth_config({{"pcc", "", ""}});
  BenchmarkData data = prepare_benchmark_data(cfg);
  QuantModel model = fit_method(cfg.methods[0], &data.train, &data.train_bags, cfg.seed);
  auto seq = evaluate_model(model, data.test_bags, data.test_prevalences, 1);
  auto par = evaluate_model(model, data.test_bags, data.test_prevalences, 4);
  REQUIRE(seq.size() == par.size());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    CHECK(seq[i].bag_id == par[i].bag_id);
    CHECK(seq[i].ae == par[i].ae);
    CHECK(seq[i].rae == par[i].rae);
  }
}

TEST_CASE("a failing method does not poison the table") {
  // hdy is binary-only; on a 3-class problem it must fail in isolation
  ExperimentConfig cfg;
  SyntheticSpec spec;
  spec.classes = {{{-2.0}, {0.3}, 100}, {{0.0}, {0.3}, 100}, {{2.0}, {0.3}, 100}};
  spec.train_bags = 10;
  spec.train_bag_size = 20;
  spec.test_bags = 5;
  spec.test_bag_size = 20;
  cfg.synthetic = spec;
  cfg.methods = {{"hdy", "", ""}, {"cc", "", ""}};
  cfg.seed = 3;

  ResultTable table = run_benchmark(cfg, 1);
  REQUIRE(table.summaries.size() == 2);
  CHECK(!table.summaries[0].error.empty());
  CHECK(table.summaries[0].n_bags == 0);
  CHECK(table.summaries[1].error.empty());
  CHECK(table.rows.size() == 5);
}

TEST_CASE("report writes csv and markdown") {
  ExperimentConfig cfg = small_synth_config({{"cc", "", ""}, {"pcc", "", ""}});
  ResultTable table = run_benchmark(cfg, 1);
  TempDir out("report");
  report(table, "csv", out.path);
  report(table, "markdown", out.path);

  const std::string per_bag = read_file(out.path / "per_bag.csv");
  CHECK(std::count(per_bag.begin(), per_bag.end(), '\n') == 21);  // header + 2 x 10 rows

  const std::string md = read_file(out.path / "summary.md");
  CHECK(md.find("| method | AE | RAE |") != std::string::npos);
  CHECK(md.find("cc") != std::string::npos);

  // the summary means match a recomputation from the rows exactly
  for (const MethodSummary& s : table.summaries) {
    double sum = 0.0;
    int n = 0;
    for (const ResultRow& r : table.rows)
      if (r.method == s.method) {
        sum += r.ae;
        ++n;
      }
    CHECK(s.n_bags == n);
    CHECK(s.ae_mean == doctest::Approx(sum / n).epsilon(1e-12));
  }

  CHECK_THROWS_AS(report(table, "yaml", out.path), Error);
}

TEST_CASE("models round-trip through json") {
  TempDir dir("models");
  LabeledDataset data = synth_dataset({{{-1.0}, {1.0}, 150}, {{1.0}, {1.0}, 150}}, 21);
  AppConfig app;
  app.bag_size = 40;
  app.bag_count = 25;
  app.seed = 5;
  BagDataset bags = app_generate(data, app);
  Bag probe(Matrix::Random(30, 1));

  for (const char* kind : {"cc", "pacc", "emq", "emq-bcts", "hdy"}) {
    MethodSpec spec{kind, "", ""};
    QuantModel model = fit_method(spec, &data, &bags, 11);
    const fs::path file = dir.path / (std::string(kind) + ".json");
    save_model(model, file);
    QuantModel loaded = load_model(file);
    CHECK(loaded.kind == kind);
    Prevalence a = model.quantify(probe);
    Prevalence b = loaded.quantify(probe);
    for (std::size_t j = 0; j < a.size(); ++j) CHECK(a[j] == b[j]);
  }

  MethodSpec neural{"histnet-soft", "desk", R"({"max_epochs":3,"bins":8})"};
  QuantModel net_model = fit_method(neural, &data, &bags, 11);
  const fs::path file = dir.path / "histnet.json";
  save_model(net_model, file);
  QuantModel loaded = load_model(file);
  Prevalence a = net_model.quantify(probe);
  Prevalence b = loaded.quantify(probe);
  for (std::size_t j = 0; j < a.size(); ++j) CHECK(a[j] == b[j]);

  CHECK_THROWS_AS(load_model(dir.path / "missing.json"), Error);
}

TEST_CASE("bins_sweep trains one model per bin count") {
  ExperimentConfig cfg = small_synth_config(
      {{"histnet-hard", "desk", R"({"max_epochs":3,"feature_layers":[8,4],"head_hidden":[16]})"}});
  ResultTable table = bins_sweep(cfg, {8, 16}, 1);
  REQUIRE(table.summaries.size() == 2);
  CHECK(table.summaries[0].method == "histnet-hard[bins=8]");
  CHECK(table.summaries[1].method == "histnet-hard[bins=16]");
  for (const MethodSummary& s : table.summaries) {
    CHECK(s.error.empty());
    CHECK(std::isfinite(s.ae_mean));
    CHECK(std::isfinite(s.rae_mean));
  }

  ExperimentConfig no_hist = small_synth_config({{"cc", "", ""}});
  CHECK_THROWS_AS(bins_sweep(no_hist, {8}, 1), Error);
}

TEST_CASE("toy experiment smoke run") {
  ToyOptions opts;
  opts.train_vectors = 400;
  opts.val_vectors = 100;
  opts.test_vectors = 100;
  opts.max_epochs = 5;
  opts.patience = 5;
  ToyResult r = toy_histogram_experiment(ToyTarget::avg, 1, opts);
  CHECK(r.epochs_run >= 1);
  CHECK(std::isfinite(r.test_ae));
  CHECK(r.test_ae < 0.2);  // far better than predicting a constant

  CHECK_THROWS_AS(toy_target_from_string("mode"), Error);
}

TEST_CASE("experiment config parsing") {
  nlohmann::json j = {
      {"seed", 9},
      {"dataset",
       {{"synthetic",
         {{"classes", nlohmann::json::array({{{"mean", {0.0}}, {"sigma", 1.0}, {"count", 10}},
                                             {{"mean", {1.0}}, {"sigma", 1.0}, {"count", 10}}})},
          {"train_bags", 4},
          {"train_bag_size", 8},
          {"test_bags", 2},
          {"test_bag_size", 8}}}}},
      {"methods", nlohmann::json::array({{{"name", "cc"}}})},
  };
  ExperimentConfig cfg = parse_experiment_config(j);
  CHECK(cfg.seed == 9);
  REQUIRE(cfg.synthetic.has_value());
  CHECK(cfg.synthetic->train_bags == 4);
  CHECK(cfg.methods.size() == 1);

  nlohmann::json bad = {{"dataset", {{"synthetic", {{"classes", nlohmann::json::array()}}}}},
                        {"methods", nlohmann::json::array()}};
  CHECK_THROWS_AS(parse_experiment_config(bad), Error);
}
