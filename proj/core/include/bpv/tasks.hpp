#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "bpv/infer.hpp"
#include "bpv/model.hpp"
#include "bpv/train.hpp"

namespace bpv {

enum class FeatureKind { kMap, kVi, kParaphraseMap, kParaphraseVi };

// Classifier inputs: N rows of width F with binary labels.
// F = E (map), 2E (vi), and twice that again for paraphrase variants.
struct FeatureSet {
  std::vector<Vec> rows;
  std::vector<std::int8_t> labels;
  FeatureKind kind = FeatureKind::kMap;

  std::size_t width() const { return rows.empty() ? 0 : rows.front().size(); }
};

// MAP features: the point estimate itself.
Vec features_map(const Vec& d);

// VI features: [mu_1..mu_E, sigma_1..sigma_E].
Vec features_vi(const GaussianPosterior& q);

// Pair features: [x * x', |x - x'|]; symmetric in its arguments.
// Throws InputError on length mismatch.
Vec paraphrase_features(const Vec& x, const Vec& y);

struct LogRegConfig {
  double l2 = 1e-4;
  double lr = 1.0;
  std::uint32_t epochs = 500;
  double grad_tol = 1e-6;  // stop when ||grad||_inf drops below
};

// L2-regularized logistic regression with per-column standardization folded
// into the model.
struct LogRegModel {
  Vec weights;
  double bias = 0.0;
  Vec feature_mean;
  Vec feature_scale;
  double l2 = 0.0;
  bool single_class = false;

  double predict_probability(std::span<const double> x) const;
};

// Full-batch gradient descent on the regularized cross-entropy, halving the
// step on any objective increase. A single-class training set yields weights
// 0 and bias = logit of the (clamped) class prior.
LogRegModel train_logreg(const FeatureSet& features, const LogRegConfig& cfg);

// Fraction of rows whose thresholded prediction (p >= 0.5) matches the label.
// Throws InputError on feature-width mismatch.
double evaluate_accuracy(const LogRegModel& model, const FeatureSet& features);

enum class TaskKind { kSentiment, kParaphrase };
enum class InferenceKind { kMap, kVi };

TaskKind parse_task_kind(const std::string& name);
InferenceKind parse_inference_kind(const std::string& name);

struct TaskPaths {
  std::string train_file;
  std::string test_file;
  std::string output_dir;  // intermediate artifacts land here when non-empty
};

struct TaskConfig {
  Hyperparams hyper;
  TrainConfig train;
  ViConfig vi;
  LogRegConfig logreg;
  VocabPolicy vocab_policy;
  bool cv_l2 = false;  // pick l2 by 5-fold cross-validation
  std::uint32_t threads = 1;
};

struct TaskMetrics {
  std::string task;
  std::string inference;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  double accuracy = 0.0;
  std::size_t feature_width = 0;
  double classifier_l2 = 0.0;
  std::uint64_t seed = 0;
  Hyperparams hyper;  // as resolved for the run (negatives_per_doc filled in)
  // per-class test counts: label -> (total, correctly classified)
  std::map<int, std::pair<std::size_t, std::size_t>> per_class;
};

// End-to-end pipeline: vocabulary, stage-1 training on all text, stage-2
// inference, feature construction, classifier training on labeled training
// rows, accuracy on labeled test rows.
TaskMetrics run_task(TaskKind task, InferenceKind inference,
                     const TaskPaths& paths, const TaskConfig& cfg);

void write_metrics_json(const TaskMetrics& metrics, const std::string& path);

}  // namespace bpv
