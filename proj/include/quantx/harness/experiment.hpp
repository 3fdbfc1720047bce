#ifndef QUANTX_HARNESS_EXPERIMENT_HPP
#define QUANTX_HARNESS_EXPERIMENT_HPP

#include <filesystem>
#include <optional>

#include "json.hpp"
#include "quantx/harness/lequa.hpp"
#include "quantx/harness/model_io.hpp"
#include "quantx/harness/presets.hpp"

namespace quantx {

/// Synthetic benchmark source: a labeled pool of diagonal Gaussians, bag
/// collections drawn from it by the artificial-prevalence protocol, and an
/// independently drawn pool for the test bags.
struct SyntheticSpec {
  std::vector<GaussianClassSpec> classes;
  int train_bags = 500;
  int train_bag_size = 250;
  int test_bags = 500;
  int test_bag_size = 250;
};

struct MethodSpec {
  std::string name;     // cc, pcc, acc, pacc, emq, emq-bcts, hdy,
                        // histnet-{hard,soft,softrbf,sigmoid}, deepsets-{avg,median,max}
  std::string preset;   // neural preset name; empty = "desk"
  std::string options;  // JSON object with per-method overrides; may be empty
};

struct ExperimentConfig {
  std::optional<std::filesystem::path> lequa_dir;
  std::optional<SyntheticSpec> synthetic;
  std::vector<MethodSpec> methods;
  std::vector<std::string> metrics{"ae", "rae"};
  std::uint64_t seed = 42;
};

ExperimentConfig parse_experiment_config(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Materialized benchmark inputs: instance-labeled training data for the
/// classifier-based methods, prevalence-labeled bags for the bag-level
/// methods, and the shared test bags.
struct BenchmarkData {
  LabeledDataset train;
  BagDataset train_bags;
  std::vector<Bag> test_bags;
  std::vector<Prevalence> test_prevalences;
};

BenchmarkData prepare_benchmark_data(const ExperimentConfig& cfg);

bool is_neural_method(const std::string& name);

/// Trains one method. Classifier-based methods consume the labeled data,
/// bag-level methods the bag collection; passing only what a method needs is
/// allowed (the other argument may be null).
QuantModel fit_method(const MethodSpec& spec, const LabeledDataset* train,
                      const BagDataset* train_bags, std::uint64_t seed);

struct ResultRow {
  std::string method;
  int bag_id = 0;
  double ae = 0.0;
  double rae = 0.0;
};

struct MethodSummary {
  std::string method;
  int n_bags = 0;
  double ae_mean = 0.0, ae_std = 0.0;
  double rae_mean = 0.0, rae_std = 0.0;
  std::string error;  // non-empty when the method failed; its rows are absent
};

struct ResultTable {
  std::vector<ResultRow> rows;
  std::vector<MethodSummary> summaries;
};

/// Per-bag metrics for one trained model, parallel over bags; rows come back
/// ordered by bag id regardless of scheduling. The smoothing factor of the
/// relative error is 1/(2 * bag size).
std::vector<ResultRow> evaluate_model(const QuantModel& model, const std::vector<Bag>& bags,
                                      const std::vector<Prevalence>& gold, int threads);

MethodSummary summarize(const std::string& method, const std::vector<ResultRow>& rows);

/// Fits every configured method and evaluates all of them on the same test
/// bags. A failing method is recorded in its summary; the others continue.
ResultTable run_benchmark(const ExperimentConfig& cfg, int threads);

/// Writes per_bag.csv + summary.csv ("csv") or summary.md sorted by mean
/// relative error ("markdown") under out_dir.
void report(const ResultTable& table, const std::string& format,
            const std::filesystem::path& out_dir);

/// Re-trains the first neural method once per bin count, all else identical.
ResultTable bins_sweep(const ExperimentConfig& cfg, const std::vector<int>& bin_counts,
                       int threads);

}  // namespace quantx

#endif
