// bpv: Bayesian paragraph vectors pipeline.
//
// Subcommands: build-vocab, train, infer, entropy-report, task. Options can
// also be given through a flat "key = value" file via --config; command-line
// flags override file values. Exit codes: 0 success, 1 runtime/numerical
// failure, 2 usage or input error.

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "bpv/corpus.hpp"
#include "bpv/errors.hpp"
#include "bpv/infer.hpp"
#include "bpv/model.hpp"
#include "bpv/run_config.hpp"
#include "bpv/sampling.hpp"
#include "bpv/stats.hpp"
#include "bpv/tasks.hpp"
#include "bpv/train.hpp"
#include "bpv/vocab.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void require_path(const std::string& value, const char* flag) {
  if (value.empty()) {
    throw bpv::InputError(std::string("missing required option ") + flag);
  }
}

void require_file(const std::string& path, const char* what) {
  if (!fs::exists(path)) {
    throw bpv::InputError(std::string(what) + " not found: " + path);
  }
}

std::vector<bpv::Document> load_documents(const bpv::RunConfig& cfg,
                                          const bpv::Vocabulary& vocab) {
  require_path(cfg.input, "--input");
  require_file(cfg.input, "corpus file");
  const bpv::RawCorpus corpus =
      bpv::load_corpus(cfg.input, bpv::parse_corpus_format(cfg.format));
  return bpv::to_documents(corpus.documents, vocab);
}

std::int64_t resolve_negatives(const bpv::RunConfig& cfg,
                               std::span<const bpv::Document> docs) {
  if (cfg.negatives_per_doc >= 0) return cfg.negatives_per_doc;
  if (docs.empty()) return 0;
  return bpv::compute_negatives_per_doc(docs, cfg.window);
}

void write_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw bpv::InputError("cannot write file: " + path);
  out << j.dump(2) << "\n";
}

json checkpoint_meta(const bpv::Hyperparams& hyper, std::int64_t negatives,
                     std::uint32_t epochs_completed) {
  json meta;
  meta["embedding_dim"] = hyper.embedding_dim;
  meta["lambda"] = hyper.prior_std_global;
  meta["phi"] = hyper.prior_std_doc;
  meta["window"] = hyper.window;
  meta["negatives_per_doc"] = negatives;
  meta["seed"] = hyper.seed;
  meta["epochs_completed"] = epochs_completed;
  // Per-epoch streams are derived from (seed, epoch), so these two integers
  // are the full rng state needed to resume.
  meta["rng_state"] = {{"global_seed", hyper.seed},
                       {"next_epoch", epochs_completed}};
  return meta;
}

int cmd_build_vocab(const bpv::RunConfig& cfg) {
  require_path(cfg.input, "--input");
  require_path(cfg.output_dir, "--output-dir");
  require_file(cfg.input, "corpus file");

  const bpv::RawCorpus corpus =
      bpv::load_corpus(cfg.input, bpv::parse_corpus_format(cfg.format));
  const bpv::Vocabulary vocab =
      bpv::build_vocab(corpus.documents, cfg.vocab_policy());

  fs::create_directories(cfg.output_dir);
  vocab.save((fs::path(cfg.output_dir) / "vocab.txt").string());
  cfg.write_resolved(cfg.output_dir);

  std::cout << "vocabulary size: " << vocab.size() << "\n"
            << "total in-vocab tokens: " << vocab.total_tokens() << "\n";
  return 0;
}

int cmd_train(const bpv::RunConfig& cfg) {
  require_path(cfg.vocab_path, "--vocab");
  require_path(cfg.output_dir, "--output-dir");
  require_file(cfg.vocab_path, "vocabulary file");

  const bpv::Vocabulary vocab = bpv::Vocabulary::load(cfg.vocab_path);
  const std::vector<bpv::Document> docs = load_documents(cfg, vocab);

  bpv::Hyperparams hyper = cfg.hyper();
  hyper.negatives_per_doc = resolve_negatives(cfg, docs);
  const bpv::TrainConfig train_cfg = cfg.train_config();

  fs::create_directories(cfg.output_dir);
  const fs::path out(cfg.output_dir);

  // Resume from the newest epoch checkpoint when requested.
  bpv::GlobalEmbeddings resume_state;
  const bpv::GlobalEmbeddings* init = nullptr;
  std::uint32_t resume_epoch = 0;
  if (cfg.resume && fs::exists(out / "meta.json")) {
    std::ifstream meta_in(out / "meta.json");
    json meta = json::parse(meta_in);
    if (meta.at("embedding_dim").get<std::uint32_t>() != hyper.embedding_dim ||
        meta.at("seed").get<std::uint64_t>() != hyper.seed) {
      throw bpv::InputError("checkpoint in " + cfg.output_dir +
                            " does not match the configured run");
    }
    resume_epoch = meta.at("epochs_completed").get<std::uint32_t>();
    if (resume_epoch > 0) {
      const std::string suffix = ".epoch" + std::to_string(resume_epoch);
      resume_state.u = bpv::load_embedding_matrix(
          (out / ("U" + suffix + ".txt")).string(), vocab);
      resume_state.v = bpv::load_embedding_matrix(
          (out / ("V" + suffix + ".txt")).string(), vocab);
      init = &resume_state;
    }
  }

  std::ofstream log(out / "train_log.csv",
                    resume_epoch > 0 ? std::ios::app : std::ios::trunc);
  if (resume_epoch == 0) log << "epoch,mean_doc_objective,lr_end\n";

  const auto on_epoch = [&](const bpv::EpochStats& stats,
                            const bpv::GlobalEmbeddings& emb) {
    const std::string suffix = ".epoch" + std::to_string(stats.epoch);
    bpv::save_embedding_matrix(emb.u, vocab, (out / ("U" + suffix + ".txt")).string());
    bpv::save_embedding_matrix(emb.v, vocab, (out / ("V" + suffix + ".txt")).string());
    write_json(checkpoint_meta(hyper, hyper.negatives_per_doc, stats.epoch),
               (out / "meta.json").string());
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", stats.mean_doc_objective);
    log << stats.epoch << "," << buf;
    std::snprintf(buf, sizeof(buf), "%.9g", stats.lr_end);
    log << "," << buf << "\n";
    log.flush();
  };

  const bpv::TrainResult result = bpv::train_global_embeddings(
      docs, vocab, hyper, train_cfg, on_epoch, init, resume_epoch);

  bpv::save_embedding_matrix(result.embeddings.u, vocab, (out / "U.txt").string());
  bpv::save_embedding_matrix(result.embeddings.v, vocab, (out / "V.txt").string());
  write_json(checkpoint_meta(hyper, hyper.negatives_per_doc, train_cfg.epochs),
             (out / "meta.json").string());
  cfg.write_resolved(cfg.output_dir);

  std::cout << "trained " << docs.size() << " documents for "
            << (train_cfg.epochs - resume_epoch) << " epoch(s), k="
            << hyper.negatives_per_doc << "\n";
  return 0;
}

int cmd_infer(const bpv::RunConfig& cfg) {
  require_path(cfg.vocab_path, "--vocab");
  require_path(cfg.embeddings_dir, "--embeddings");
  require_path(cfg.output_dir, "--output-dir");
  require_file(cfg.vocab_path, "vocabulary file");

  const bpv::Vocabulary vocab = bpv::Vocabulary::load(cfg.vocab_path);
  const fs::path emb_dir(cfg.embeddings_dir);
  require_file((emb_dir / "U.txt").string(), "embedding checkpoint");
  const bpv::Matrix u =
      bpv::load_embedding_matrix((emb_dir / "U.txt").string(), vocab);
  const bpv::Matrix v =
      bpv::load_embedding_matrix((emb_dir / "V.txt").string(), vocab);
  if (u.cols() != v.cols()) {
    throw bpv::InputError("embedding dimension mismatch between U (" +
                          std::to_string(u.cols()) + ") and V (" +
                          std::to_string(v.cols()) + ")");
  }

  const std::vector<bpv::Document> docs = load_documents(cfg, vocab);

  bpv::Hyperparams hyper = cfg.hyper();
  hyper.embedding_dim = static_cast<std::uint32_t>(u.cols());
  hyper.negatives_per_doc = resolve_negatives(cfg, docs);

  const bpv::NoiseSampler sampler(vocab);
  const bpv::ViConfig vi_cfg = cfg.vi_config();

  fs::create_directories(cfg.output_dir);
  const fs::path out(cfg.output_dir);

  if (bpv::parse_inference_kind(cfg.mode) == bpv::InferenceKind::kMap) {
    const std::vector<bpv::Vec> vectors =
        bpv::infer_map_corpus(docs, u, v, &sampler, hyper.negatives_per_doc,
                              hyper, vi_cfg, cfg.threads);
    bpv::save_map_vectors(vectors, (out / "map_vectors.txt").string());
    std::cout << "wrote MAP vectors for " << vectors.size() << " documents\n";
  } else {
    const std::vector<bpv::GaussianPosterior> posteriors =
        bpv::infer_vi_corpus(docs, u, v, &sampler, hyper.negatives_per_doc,
                             hyper, vi_cfg, cfg.threads);
    bpv::save_posteriors(posteriors, (out / "posterior.txt").string());

    const bpv::EntropyReport report = bpv::make_entropy_report(posteriors, docs);
    bpv::write_entropy_csv(report, (out / "entropy.csv").string());
    json summary;
    summary["n_docs"] = report.rows.size();
    summary["spearman_length_entropy"] =
        report.spearman_rho ? json(*report.spearman_rho) : json(nullptr);
    write_json(summary, (out / "entropy_summary.json").string());
    std::cout << "wrote posteriors for " << posteriors.size() << " documents\n";
  }
  cfg.write_resolved(cfg.output_dir);
  return 0;
}

int cmd_entropy_report(const bpv::RunConfig& cfg) {
  require_path(cfg.posterior_path, "--posterior");
  require_path(cfg.vocab_path, "--vocab");
  require_path(cfg.output_dir, "--output-dir");
  require_file(cfg.posterior_path, "posterior file");
  require_file(cfg.vocab_path, "vocabulary file");

  const bpv::Vocabulary vocab = bpv::Vocabulary::load(cfg.vocab_path);
  const std::vector<bpv::GaussianPosterior> posteriors =
      bpv::load_posteriors(cfg.posterior_path);
  const std::vector<bpv::Document> docs = load_documents(cfg, vocab);

  const bpv::EntropyReport report = bpv::make_entropy_report(posteriors, docs);

  fs::create_directories(cfg.output_dir);
  const fs::path out(cfg.output_dir);
  bpv::write_entropy_csv(report, (out / "entropy.csv").string());
  json summary;
  summary["n_docs"] = report.rows.size();
  summary["spearman_length_entropy"] =
      report.spearman_rho ? json(*report.spearman_rho) : json(nullptr);
  write_json(summary, (out / "entropy_summary.json").string());
  cfg.write_resolved(cfg.output_dir);

  std::cout << "entropy report for " << report.rows.size() << " documents\n";
  return 0;
}

int cmd_task(const bpv::RunConfig& cfg) {
  require_path(cfg.train_file, "--train-file");
  require_path(cfg.test_file, "--test-file");
  require_path(cfg.output_dir, "--output-dir");
  require_file(cfg.train_file, "training file");
  require_file(cfg.test_file, "test file");

  bpv::TaskConfig task_cfg;
  task_cfg.hyper = cfg.hyper();
  task_cfg.train = cfg.train_config();
  task_cfg.vi = cfg.vi_config();
  task_cfg.logreg = cfg.logreg_config();
  task_cfg.vocab_policy = cfg.vocab_policy();
  task_cfg.cv_l2 = cfg.cv_l2;
  task_cfg.threads = cfg.threads;

  bpv::TaskPaths paths;
  paths.train_file = cfg.train_file;
  paths.test_file = cfg.test_file;
  paths.output_dir = cfg.output_dir;

  const bpv::TaskMetrics metrics =
      bpv::run_task(bpv::parse_task_kind(cfg.task),
                    bpv::parse_inference_kind(cfg.inference), paths, task_cfg);
  cfg.write_resolved(cfg.output_dir);

  std::cout << metrics.task << " (" << metrics.inference
            << "): accuracy = " << metrics.accuracy << " on " << metrics.n_test
            << " test rows\n";
  return 0;
}

void add_config_flags(CLI::App* sub, bpv::RunConfig& cfg) {
  sub->add_option("--config", "flat key = value config file (parsed first)")
      ->option_text("FILE");
  sub->add_option("--embedding-dim", cfg.embedding_dim);
  sub->add_option("--lambda", cfg.lambda);
  sub->add_option("--phi", cfg.phi);
  sub->add_option("--window", cfg.window);
  sub->add_option("--negatives-per-doc", cfg.negatives_per_doc);
  sub->add_option("--seed", cfg.seed);
  sub->add_option("--max-vocab", cfg.max_vocab);
  sub->add_option("--min-count", cfg.min_count);
  sub->add_option("--inner-lr", cfg.inner_lr);
  sub->add_option("--inner-max-iters", cfg.inner_max_iters);
  sub->add_option("--inner-grad-tol", cfg.inner_grad_tol);
  sub->add_option("--outer-lr0", cfg.outer_lr0);
  sub->add_option("--epochs", cfg.epochs);
  sub->add_flag("--resume", cfg.resume);
  sub->add_option("--vi-steps", cfg.vi_steps);
  sub->add_option("--vi-lr0", cfg.vi_lr0);
  sub->add_option("--mc-samples", cfg.mc_samples);
  sub->add_option("--l2", cfg.l2);
  sub->add_option("--classifier-lr", cfg.classifier_lr);
  sub->add_option("--classifier-epochs", cfg.classifier_epochs);
  sub->add_flag("--cv-l2", cfg.cv_l2);
  sub->add_option("--threads", cfg.threads);
  sub->add_option("--format", cfg.format);
  sub->add_option("--input", cfg.input);
  sub->add_option("--vocab", cfg.vocab_path);
  sub->add_option("--embeddings", cfg.embeddings_dir);
  sub->add_option("--posterior", cfg.posterior_path);
  sub->add_option("--output-dir", cfg.output_dir);
  sub->add_option("--train-file", cfg.train_file);
  sub->add_option("--test-file", cfg.test_file);
  sub->add_option("--mode", cfg.mode);
  sub->add_option("--task", cfg.task);
  sub->add_option("--inference", cfg.inference);
}

}  // namespace

int main(int argc, char** argv) {
  bpv::RunConfig cfg;
  try {
    // The config file seeds defaults; explicit flags override below.
    for (int a = 1; a + 1 < argc; ++a) {
      if (std::strcmp(argv[a], "--config") == 0) {
        cfg = bpv::RunConfig::from_file(argv[a + 1]);
      }
    }

    CLI::App app{"Bayesian paragraph vectors"};
    app.require_subcommand(1);

    CLI::App* build_vocab = app.add_subcommand(
        "build-vocab", "Build and save a vocabulary from a corpus");
    CLI::App* train = app.add_subcommand(
        "train", "Stage 1: train global word and context embeddings");
    CLI::App* infer = app.add_subcommand(
        "infer", "Stage 2: per-document MAP vectors or Gaussian posteriors");
    CLI::App* entropy = app.add_subcommand(
        "entropy-report", "Entropy vs document length from saved posteriors");
    CLI::App* task = app.add_subcommand(
        "task", "End-to-end sentiment or paraphrase evaluation");
    for (CLI::App* sub : {build_vocab, train, infer, entropy, task}) {
      add_config_flags(sub, cfg);
    }

    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e);
      return code == 0 ? 0 : 2;
    }

    if (build_vocab->parsed()) return cmd_build_vocab(cfg);
    if (train->parsed()) return cmd_train(cfg);
    if (infer->parsed()) return cmd_infer(cfg);
    if (entropy->parsed()) return cmd_entropy_report(cfg);
    if (task->parsed()) return cmd_task(cfg);
    return 2;
  } catch (const bpv::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const bpv::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
