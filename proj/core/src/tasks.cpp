#include "bpv/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "bpv/errors.hpp"
#include "bpv/numeric.hpp"

namespace bpv {

Vec features_map(const Vec& d) { return d; }

Vec features_vi(const GaussianPosterior& q) {
  Vec x;
  x.reserve(2 * q.mu.size());
  x.insert(x.end(), q.mu.begin(), q.mu.end());
  const Vec sigma = q.sigma();
  x.insert(x.end(), sigma.begin(), sigma.end());
  return x;
}

Vec paraphrase_features(const Vec& x, const Vec& y) {
  if (x.size() != y.size()) {
    throw InputError("paraphrase feature length mismatch: " +
                     std::to_string(x.size()) + " vs " +
                     std::to_string(y.size()));
  }
  Vec out;
  out.reserve(2 * x.size());
  for (std::size_t k = 0; k < x.size(); ++k) out.push_back(x[k] * y[k]);
  for (std::size_t k = 0; k < x.size(); ++k)
    out.push_back(std::fabs(x[k] - y[k]));
  return out;
}

double LogRegModel::predict_probability(std::span<const double> x) const {
  if (x.size() != weights.size()) {
    throw InputError("feature width " + std::to_string(x.size()) +
                     " does not match model width " +
                     std::to_string(weights.size()));
  }
  double z = bias;
  for (std::size_t k = 0; k < x.size(); ++k) {
    z += weights[k] * (x[k] - feature_mean[k]) / feature_scale[k];
  }
  return sigmoid(z);
}

namespace {

// Mean regularized cross-entropy and its gradient on standardized rows.
double logreg_objective(const std::vector<Vec>& rows,
                        const std::vector<std::int8_t>& labels,
                        const Vec& w, double b, double l2, Vec* grad_w,
                        double* grad_b) {
  const double inv_n = 1.0 / static_cast<double>(rows.size());
  if (grad_w != nullptr) grad_w->assign(w.size(), 0.0);
  if (grad_b != nullptr) *grad_b = 0.0;

  double loss = 0.0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const double z = b + dot(rows[r], w);
    loss -= labels[r] ? log_sigmoid(z) : log_sigmoid(-z);
    if (grad_w != nullptr) {
      const double err = sigmoid(z) - static_cast<double>(labels[r]);
      axpy(err * inv_n, rows[r], *grad_w);
      *grad_b += err * inv_n;
    }
  }
  loss *= inv_n;
  loss += 0.5 * l2 * squared_norm(w);
  if (grad_w != nullptr) axpy(l2, w, *grad_w);
  return loss;
}

}  // namespace

LogRegModel train_logreg(const FeatureSet& features, const LogRegConfig& cfg) {
  if (features.rows.empty()) throw InputError("empty training set");
  if (features.rows.size() != features.labels.size()) {
    throw InputError("feature/label count mismatch");
  }
  const std::size_t width = features.width();
  const std::size_t n = features.rows.size();

  LogRegModel model;
  model.l2 = cfg.l2;
  model.weights.assign(width, 0.0);
  model.feature_mean.assign(width, 0.0);
  model.feature_scale.assign(width, 1.0);

  // Per-column standardization, stored in the model.
  for (const auto& row : features.rows) axpy(1.0, row, model.feature_mean);
  for (double& m : model.feature_mean) m /= static_cast<double>(n);
  Vec variance(width, 0.0);
  for (const auto& row : features.rows) {
    for (std::size_t k = 0; k < width; ++k) {
      const double d = row[k] - model.feature_mean[k];
      variance[k] += d * d;
    }
  }
  for (std::size_t k = 0; k < width; ++k) {
    const double sd = std::sqrt(variance[k] / static_cast<double>(n));
    model.feature_scale[k] = sd > 1e-12 ? sd : 1.0;
  }

  std::size_t positives = 0;
  for (std::int8_t label : features.labels) {
    if (label != 0 && label != 1) {
      throw InputError("labels must be 0 or 1 for classifier training");
    }
    positives += label;
  }
  if (positives == 0 || positives == n) {
    // Degenerate training set: predict the (clamped) class prior everywhere.
    model.single_class = true;
    const double prior = std::clamp(
        static_cast<double>(positives) / static_cast<double>(n), 1e-9,
        1.0 - 1e-9);
    model.bias = std::log(prior / (1.0 - prior));
    return model;
  }

  std::vector<Vec> rows(n, Vec(width));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t k = 0; k < width; ++k) {
      rows[r][k] =
          (features.rows[r][k] - model.feature_mean[k]) / model.feature_scale[k];
    }
  }

  Vec grad(width);
  double grad_b = 0.0;
  double objective = logreg_objective(rows, features.labels, model.weights,
                                      model.bias, cfg.l2, &grad, &grad_b);
  double lr = cfg.lr;

  for (std::uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (std::max(inf_norm(grad), std::fabs(grad_b)) < cfg.grad_tol) break;

    // Full-batch descent step; halve the step while the objective rises.
    Vec w_next(width);
    double b_next = 0.0;
    bool accepted = false;
    for (int halving = 0; halving <= 40; ++halving) {
      w_next = model.weights;
      axpy(-lr, grad, w_next);
      b_next = model.bias - lr * grad_b;
      const double next_objective = logreg_objective(
          rows, features.labels, w_next, b_next, cfg.l2, nullptr, nullptr);
      if (next_objective <= objective) {
        model.weights = w_next;
        model.bias = b_next;
        objective = next_objective;
        accepted = true;
        break;
      }
      lr *= 0.5;
    }
    if (!accepted) break;
    objective = logreg_objective(rows, features.labels, model.weights,
                                 model.bias, cfg.l2, &grad, &grad_b);
  }
  return model;
}

double evaluate_accuracy(const LogRegModel& model, const FeatureSet& features) {
  if (features.rows.empty()) throw InputError("empty evaluation set");
  std::size_t correct = 0;
  for (std::size_t r = 0; r < features.rows.size(); ++r) {
    const int predicted =
        model.predict_probability(features.rows[r]) >= 0.5 ? 1 : 0;
    correct += predicted == features.labels[r];
  }
  return static_cast<double>(correct) / static_cast<double>(features.rows.size());
}

TaskKind parse_task_kind(const std::string& name) {
  if (name == "sentiment") return TaskKind::kSentiment;
  if (name == "paraphrase") return TaskKind::kParaphrase;
  throw InputError("unknown task: " + name +
                   " (expected sentiment or paraphrase)");
}

InferenceKind parse_inference_kind(const std::string& name) {
  if (name == "map") return InferenceKind::kMap;
  if (name == "vi") return InferenceKind::kVi;
  throw InputError("unknown inference mode: " + name + " (expected map or vi)");
}

namespace {

template <typename Fn>
auto with_stage(const char* stage, Fn&& fn) {
  try {
    return fn();
  } catch (const InputError& e) {
    throw InputError(std::string("stage ") + stage + ": " + e.what());
  } catch (const NumericError& e) {
    throw NumericError(std::string("stage ") + stage + ": " + e.what());
  }
}

double cross_validate_l2(const FeatureSet& train, const LogRegConfig& base) {
  static constexpr double kGrid[] = {1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0};
  static constexpr std::size_t kFolds = 5;

  double best_l2 = base.l2;
  double best_accuracy = -1.0;
  for (const double l2 : kGrid) {
    double accuracy_sum = 0.0;
    std::size_t fold_count = 0;
    for (std::size_t fold = 0; fold < kFolds; ++fold) {
      FeatureSet fit, val;
      fit.kind = val.kind = train.kind;
      for (std::size_t r = 0; r < train.rows.size(); ++r) {
        FeatureSet& dst = (r % kFolds == fold) ? val : fit;
        dst.rows.push_back(train.rows[r]);
        dst.labels.push_back(train.labels[r]);
      }
      if (val.rows.empty() || fit.rows.empty()) continue;
      LogRegConfig cfg = base;
      cfg.l2 = l2;
      accuracy_sum += evaluate_accuracy(train_logreg(fit, cfg), val);
      ++fold_count;
    }
    if (fold_count == 0) continue;
    const double mean_accuracy = accuracy_sum / static_cast<double>(fold_count);
    if (mean_accuracy > best_accuracy) {
      best_accuracy = mean_accuracy;
      best_l2 = l2;
    }
  }
  return best_l2;
}

FeatureKind feature_kind(TaskKind task, InferenceKind inference) {
  if (task == TaskKind::kSentiment) {
    return inference == InferenceKind::kMap ? FeatureKind::kMap
                                            : FeatureKind::kVi;
  }
  return inference == InferenceKind::kMap ? FeatureKind::kParaphraseMap
                                          : FeatureKind::kParaphraseVi;
}

}  // namespace

TaskMetrics run_task(TaskKind task, InferenceKind inference,
                     const TaskPaths& paths, const TaskConfig& cfg) {
  namespace fs = std::filesystem;
  cfg.hyper.validate();

  const CorpusFormat format = task == TaskKind::kSentiment
                                  ? CorpusFormat::kLabeledTsv
                                  : CorpusFormat::kPairTsv;

  // Load both splits; all text participates in the unsupervised stages.
  RawCorpus train_corpus, test_corpus;
  with_stage("load-corpus", [&] {
    train_corpus = load_corpus(paths.train_file, format);
    test_corpus = load_corpus(paths.test_file, format);
    return 0;
  });
  const std::size_t n_train_docs = train_corpus.documents.size();

  std::vector<std::vector<std::string>> all_raw = train_corpus.documents;
  all_raw.insert(all_raw.end(), test_corpus.documents.begin(),
                 test_corpus.documents.end());

  const Vocabulary vocab = with_stage("build-vocab", [&] {
    Vocabulary v = build_vocab(all_raw, cfg.vocab_policy);
    if (v.size() == 0) throw InputError("task corpus yields an empty vocabulary");
    return v;
  });

  const std::vector<Document> docs = to_documents(all_raw, vocab);

  Hyperparams hyper = cfg.hyper;
  if (hyper.negatives_per_doc < 0) {
    hyper.negatives_per_doc = compute_negatives_per_doc(docs, hyper.window);
  }

  const TrainResult trained = with_stage("train-global", [&] {
    return train_global_embeddings(docs, vocab, hyper, cfg.train);
  });
  const Matrix& u = trained.embeddings.u;
  const Matrix& v = trained.embeddings.v;

  const NoiseSampler sampler(vocab);

  // Stage 2: per-document features.
  std::vector<Vec> doc_features(docs.size());
  std::vector<GaussianPosterior> posteriors;
  std::vector<Vec> map_vectors;
  with_stage("infer-paragraph", [&] {
    if (inference == InferenceKind::kVi) {
      posteriors = infer_vi_corpus(docs, u, v, &sampler,
                                   hyper.negatives_per_doc, hyper, cfg.vi,
                                   cfg.threads);
      for (std::size_t n = 0; n < docs.size(); ++n) {
        doc_features[n] = features_vi(posteriors[n]);
      }
    } else {
      map_vectors = infer_map_corpus(docs, u, v, &sampler,
                                     hyper.negatives_per_doc, hyper, cfg.vi,
                                     cfg.threads);
      for (std::size_t n = 0; n < docs.size(); ++n) {
        doc_features[n] = features_map(map_vectors[n]);
      }
    }
    return 0;
  });

  // Assemble labeled rows.
  FeatureSet train_set, test_set;
  train_set.kind = test_set.kind = feature_kind(task, inference);
  with_stage("build-features", [&] {
    if (task == TaskKind::kSentiment) {
      for (std::size_t r = 0; r < n_train_docs; ++r) {
        if (train_corpus.labels[r] < 0) continue;
        train_set.rows.push_back(doc_features[r]);
        train_set.labels.push_back(train_corpus.labels[r]);
      }
      for (std::size_t r = 0; r < test_corpus.documents.size(); ++r) {
        if (test_corpus.labels[r] < 0) continue;
        test_set.rows.push_back(doc_features[n_train_docs + r]);
        test_set.labels.push_back(test_corpus.labels[r]);
      }
    } else {
      for (const auto& pairing : train_corpus.pairs) {
        if (pairing.label < 0) continue;
        train_set.rows.push_back(paraphrase_features(
            doc_features[pairing.first], doc_features[pairing.second]));
        train_set.labels.push_back(pairing.label);
      }
      for (const auto& pairing : test_corpus.pairs) {
        if (pairing.label < 0) continue;
        test_set.rows.push_back(paraphrase_features(
            doc_features[n_train_docs + pairing.first],
            doc_features[n_train_docs + pairing.second]));
        test_set.labels.push_back(pairing.label);
      }
    }
    if (train_set.rows.empty()) {
      throw InputError("no labeled training rows in " + paths.train_file);
    }
    if (test_set.rows.empty()) {
      throw InputError("no labeled test rows in " + paths.test_file);
    }
    return 0;
  });

  LogRegConfig logreg_cfg = cfg.logreg;
  if (cfg.cv_l2) {
    logreg_cfg.l2 = with_stage(
        "cross-validate", [&] { return cross_validate_l2(train_set, logreg_cfg); });
  }

  const LogRegModel model = with_stage(
      "train-classifier", [&] { return train_logreg(train_set, logreg_cfg); });

  TaskMetrics metrics;
  metrics.task = task == TaskKind::kSentiment ? "sentiment" : "paraphrase";
  metrics.inference = inference == InferenceKind::kVi ? "vi" : "map";
  metrics.n_train = train_set.rows.size();
  metrics.n_test = test_set.rows.size();
  metrics.feature_width = train_set.width();
  metrics.classifier_l2 = logreg_cfg.l2;
  metrics.seed = cfg.hyper.seed;
  metrics.hyper = hyper;

  with_stage("evaluate", [&] {
    metrics.accuracy = evaluate_accuracy(model, test_set);
    for (std::size_t r = 0; r < test_set.rows.size(); ++r) {
      const int label = test_set.labels[r];
      const int predicted =
          model.predict_probability(test_set.rows[r]) >= 0.5 ? 1 : 0;
      auto& [count, correct] = metrics.per_class[label];
      ++count;
      correct += predicted == label;
    }
    return 0;
  });

  if (!paths.output_dir.empty()) {
    with_stage("write-artifacts", [&] {
      fs::create_directories(paths.output_dir);
      const fs::path out(paths.output_dir);
      vocab.save((out / "vocab.txt").string());
      save_embedding_matrix(u, vocab, (out / "U.txt").string());
      save_embedding_matrix(v, vocab, (out / "V.txt").string());
      if (inference == InferenceKind::kVi) {
        save_posteriors(posteriors, (out / "posterior.txt").string());
        write_entropy_csv(make_entropy_report(posteriors, docs),
                          (out / "entropy.csv").string());
      } else {
        save_map_vectors(map_vectors, (out / "map_vectors.txt").string());
      }
      write_metrics_json(metrics, (out / "metrics.json").string());
      return 0;
    });
  }
  return metrics;
}

void write_metrics_json(const TaskMetrics& metrics, const std::string& path) {
  nlohmann::json j;
  j["task"] = metrics.task;
  j["inference"] = metrics.inference;
  j["n_train"] = metrics.n_train;
  j["n_test"] = metrics.n_test;
  j["accuracy"] = metrics.accuracy;
  j["feature_width"] = metrics.feature_width;
  j["classifier_l2"] = metrics.classifier_l2;
  j["seed"] = metrics.seed;
  j["hyperparameters"] = {
      {"embedding_dim", metrics.hyper.embedding_dim},
      {"lambda", metrics.hyper.prior_std_global},
      {"phi", metrics.hyper.prior_std_doc},
      {"window", metrics.hyper.window},
      {"negatives_per_doc", metrics.hyper.negatives_per_doc},
      {"seed", metrics.hyper.seed},
  };
  for (const auto& [label, counts] : metrics.per_class) {
    const std::string key = std::to_string(label);
    j["per_class"][key]["count"] = counts.first;
    j["per_class"][key]["correct"] = counts.second;
  }

  std::ofstream out(path);
  if (!out) throw InputError("cannot write metrics file: " + path);
  out << j.dump(2) << "\n";
  if (!out) throw InputError("failed writing metrics file: " + path);
}

}  // namespace bpv
