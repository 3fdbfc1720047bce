#ifndef QUANTX_NEURAL_TRAIN_HPP
#define QUANTX_NEURAL_TRAIN_HPP

#include <utility>

#include "quantx/neural/network.hpp"
#include "quantx/sampling.hpp"

namespace quantx {

enum class LossKind { ae, rae };
LossKind loss_kind_from_string(const std::string& s);
std::string to_string(LossKind k);

/// Loss of one (prediction, gold) pair. For the smoothed relative error the
/// caller supplies eps, conventionally 1/(2 * bag size).
double pair_loss(const Eigen::RowVectorXd& pred, const Prevalence& gold, LossKind kind,
                 double eps);
Eigen::RowVectorXd pair_loss_grad(const Eigen::RowVectorXd& pred, const Prevalence& gold,
                                  LossKind kind, double eps);

/// Batch loss: mean of the per-pair losses.
double compute_loss(const std::vector<Prevalence>& predicted, const std::vector<Prevalence>& gold,
                    LossKind kind, double eps);

struct TrainConfig {
  LossKind loss = LossKind::rae;
  double learning_rate = 1e-3;
  double weight_decay = 0.0;
  int batch_size = 20;           // full bags per optimizer step
  double real_proportion = 0.5;  // mixer R: fraction of real bags per batch
  int patience = 20;             // epochs without validation improvement
  int max_epochs = 200;
  double validation_fraction = 0.1;
  std::uint64_t seed = 0;
};

/// One optimizer step over a batch of bags: gradients are averaged over the
/// batch and a bag is never split across steps. Returns the batch loss.
/// The per-bag smoothing factor is 1/(2 * bag size).
double backward_and_step(QuantNetwork& net, const std::vector<std::pair<Bag, Prevalence>>& batch,
                         LossKind kind, AdamW& optimizer, Rng& dropout_rng);

struct TrainHistory {
  std::vector<double> train_loss;  // per epoch, mean over steps
  std::vector<double> val_loss;    // per epoch
  int best_epoch = 0;              // 1-based epoch whose parameters were kept
  double best_val = 0.0;
  int epochs_run = 0;
};

/// Full training loop: splits the bags into train/validation, draws batches
/// through the bag mixer each epoch, early-stops after `patience` epochs
/// without validation improvement and restores the best parameters.
TrainHistory train_network(QuantNetwork& net, const BagDataset& bags, const TrainConfig& cfg);

struct GradCheckReport {
  double max_rel_dev = 0.0;
  int checked = 0;
  bool skipped = false;  // configuration sat too close to a derivative kink
};

/// Central-finite-difference audit of the reverse-mode gradients for one bag.
/// Configurations within `kink_tol` of any membership or activation kink are
/// skipped, as are hard-variant histograms (their surrogate gradient is not a
/// derivative). Networks must be built without dropout. The relative
/// deviation divides by max(|analytic|, |fd|, 1e-4) so finite-difference
/// roundoff on near-zero gradients does not masquerade as a mismatch.
GradCheckReport gradient_check(QuantNetwork& net, const Bag& bag, const Prevalence& gold,
                               LossKind kind, bool check_inputs = false, double fd_step = 1e-5,
                               double kink_tol = 1e-3);

}  // namespace quantx

#endif
