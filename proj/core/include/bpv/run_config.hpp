#pragma once

#include <cstdint>
#include <string>

#include "bpv/infer.hpp"
#include "bpv/model.hpp"
#include "bpv/tasks.hpp"
#include "bpv/train.hpp"
#include "bpv/vocab.hpp"

namespace bpv {

// Flat run configuration shared by all CLI subcommands. Serialized as
// "key = value" lines; command-line flags override file values. Every field
// has a default except input paths.
struct RunConfig {
  // model hyperparameters
  std::uint32_t embedding_dim = 100;
  double lambda = 1.0;
  double phi = 1.0;
  std::uint32_t window = 4;
  std::int64_t negatives_per_doc = -1;  // -1 = average positive-pair count
  std::uint64_t seed = 42;

  // vocabulary policy
  std::uint64_t max_vocab = 10000;
  std::uint32_t min_count = 0;  // > 0 switches to the min-count policy

  // stage-1 training
  double inner_lr = 0.05;
  std::uint32_t inner_max_iters = 100;
  double inner_grad_tol = 1e-4;
  double outer_lr0 = 0.025;
  std::uint32_t epochs = 5;
  bool resume = false;

  // stage-2 variational inference
  std::uint32_t vi_steps = 500;
  double vi_lr0 = 0.05;
  std::uint32_t mc_samples = 1;

  // downstream classifier
  double l2 = 1e-4;
  double classifier_lr = 1.0;
  std::uint32_t classifier_epochs = 500;
  bool cv_l2 = false;

  // execution
  std::uint32_t threads = 1;

  // io
  std::string format = "plain";
  std::string input;
  std::string vocab_path;
  std::string embeddings_dir;
  std::string posterior_path;
  std::string output_dir;
  std::string train_file;
  std::string test_file;
  std::string mode = "vi";        // infer: map | vi
  std::string task = "sentiment"; // task: sentiment | paraphrase
  std::string inference = "vi";   // task: map | vi

  // Applies one "key = value" assignment; throws InputError on unknown keys
  // or unparsable values.
  void apply(const std::string& key, const std::string& value);

  // Loads every assignment in the file. Lines that are empty or start with
  // '#' are skipped.
  static RunConfig from_file(const std::string& path);

  // All keys in sorted order, one "key = value" per line.
  std::string resolved_text() const;

  // Writes resolved_text() to <dir>/config.resolved.
  void write_resolved(const std::string& dir) const;

  Hyperparams hyper() const;
  TrainConfig train_config() const;
  ViConfig vi_config() const;
  VocabPolicy vocab_policy() const;
  LogRegConfig logreg_config() const;
};

}  // namespace bpv
