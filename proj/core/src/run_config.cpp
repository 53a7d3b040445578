#include "bpv/run_config.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "bpv/errors.hpp"

namespace bpv {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

template <typename T>
T parse_integer(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    long long parsed = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    const T result = static_cast<T>(parsed);
    if (static_cast<long long>(result) != parsed) {
      throw std::out_of_range(value);
    }
    return result;
  } catch (const std::exception&) {
    throw InputError("config key '" + key + "': invalid integer: " + value);
  }
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double parsed = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw InputError("config key '" + key + "': invalid number: " + value);
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw InputError("config key '" + key + "': invalid boolean: " + value);
}

}  // namespace

void RunConfig::apply(const std::string& key, const std::string& value) {
  if (key == "embedding-dim") {
    embedding_dim = parse_integer<std::uint32_t>(key, value);
  } else if (key == "lambda") {
    lambda = parse_double(key, value);
  } else if (key == "phi") {
    phi = parse_double(key, value);
  } else if (key == "window") {
    window = parse_integer<std::uint32_t>(key, value);
  } else if (key == "negatives-per-doc") {
    negatives_per_doc = parse_integer<std::int64_t>(key, value);
  } else if (key == "seed") {
    seed = parse_integer<std::uint64_t>(key, value);
  } else if (key == "max-vocab") {
    max_vocab = parse_integer<std::uint64_t>(key, value);
  } else if (key == "min-count") {
    min_count = parse_integer<std::uint32_t>(key, value);
  } else if (key == "inner-lr") {
    inner_lr = parse_double(key, value);
  } else if (key == "inner-max-iters") {
    inner_max_iters = parse_integer<std::uint32_t>(key, value);
  } else if (key == "inner-grad-tol") {
    inner_grad_tol = parse_double(key, value);
  } else if (key == "outer-lr0") {
    outer_lr0 = parse_double(key, value);
  } else if (key == "epochs") {
    epochs = parse_integer<std::uint32_t>(key, value);
  } else if (key == "resume") {
    resume = parse_bool(key, value);
  } else if (key == "vi-steps") {
    vi_steps = parse_integer<std::uint32_t>(key, value);
  } else if (key == "vi-lr0") {
    vi_lr0 = parse_double(key, value);
  } else if (key == "mc-samples") {
    mc_samples = parse_integer<std::uint32_t>(key, value);
  } else if (key == "l2") {
    l2 = parse_double(key, value);
  } else if (key == "classifier-lr") {
    classifier_lr = parse_double(key, value);
  } else if (key == "classifier-epochs") {
    classifier_epochs = parse_integer<std::uint32_t>(key, value);
  } else if (key == "cv-l2") {
    cv_l2 = parse_bool(key, value);
  } else if (key == "threads") {
    threads = parse_integer<std::uint32_t>(key, value);
  } else if (key == "format") {
    parse_corpus_format(value);  // validates
    format = value;
  } else if (key == "input") {
    input = value;
  } else if (key == "vocab") {
    vocab_path = value;
  } else if (key == "embeddings") {
    embeddings_dir = value;
  } else if (key == "posterior") {
    posterior_path = value;
  } else if (key == "output-dir") {
    output_dir = value;
  } else if (key == "train-file") {
    train_file = value;
  } else if (key == "test-file") {
    test_file = value;
  } else if (key == "mode") {
    parse_inference_kind(value);  // validates
    mode = value;
  } else if (key == "task") {
    parse_task_kind(value);  // validates
    task = value;
  } else if (key == "inference") {
    parse_inference_kind(value);  // validates
    inference = value;
  } else {
    throw InputError("unknown config key: " + key);
  }
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file: " + path);

  RunConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string trimmed = trim(line);
    if (trimmed.empty() || trimmed[0] == '#') continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos) {
      throw InputError(path + ":" + std::to_string(line_no) +
                       ": expected 'key = value': " + line);
    }
    cfg.apply(trim(trimmed.substr(0, eq)), trim(trimmed.substr(eq + 1)));
  }
  return cfg;
}

std::string RunConfig::resolved_text() const {
  std::map<std::string, std::string> kv;
  kv["embedding-dim"] = std::to_string(embedding_dim);
  kv["lambda"] = format_double(lambda);
  kv["phi"] = format_double(phi);
  kv["window"] = std::to_string(window);
  kv["negatives-per-doc"] = std::to_string(negatives_per_doc);
  kv["seed"] = std::to_string(seed);
  kv["max-vocab"] = std::to_string(max_vocab);
  kv["min-count"] = std::to_string(min_count);
  kv["inner-lr"] = format_double(inner_lr);
  kv["inner-max-iters"] = std::to_string(inner_max_iters);
  kv["inner-grad-tol"] = format_double(inner_grad_tol);
  kv["outer-lr0"] = format_double(outer_lr0);
  kv["epochs"] = std::to_string(epochs);
  kv["resume"] = resume ? "true" : "false";
  kv["vi-steps"] = std::to_string(vi_steps);
  kv["vi-lr0"] = format_double(vi_lr0);
  kv["mc-samples"] = std::to_string(mc_samples);
  kv["l2"] = format_double(l2);
  kv["classifier-lr"] = format_double(classifier_lr);
  kv["classifier-epochs"] = std::to_string(classifier_epochs);
  kv["cv-l2"] = cv_l2 ? "true" : "false";
  kv["threads"] = std::to_string(threads);
  kv["format"] = format;
  kv["input"] = input;
  kv["vocab"] = vocab_path;
  kv["embeddings"] = embeddings_dir;
  kv["posterior"] = posterior_path;
  kv["output-dir"] = output_dir;
  kv["train-file"] = train_file;
  kv["test-file"] = test_file;
  kv["mode"] = mode;
  kv["task"] = task;
  kv["inference"] = inference;

  std::ostringstream out;
  for (const auto& [key, value] : kv) out << key << " = " << value << "\n";
  return out.str();
}

void RunConfig::write_resolved(const std::string& dir) const {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const std::string path = (fs::path(dir) / "config.resolved").string();
  std::ofstream out(path);
  if (!out) throw InputError("cannot write resolved config: " + path);
  out << resolved_text();
}

Hyperparams RunConfig::hyper() const {
  Hyperparams h;
  h.embedding_dim = embedding_dim;
  h.prior_std_global = lambda;
  h.prior_std_doc = phi;
  h.window = window;
  h.negatives_per_doc = negatives_per_doc;
  h.seed = seed;
  return h;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.inner_lr = inner_lr;
  t.inner_max_iters = inner_max_iters;
  t.inner_grad_tol = inner_grad_tol;
  t.outer_lr0 = outer_lr0;
  t.epochs = epochs;
  return t;
}

ViConfig RunConfig::vi_config() const {
  ViConfig v;
  v.steps = vi_steps;
  v.lr0 = vi_lr0;
  v.mc_samples = mc_samples;
  return v;
}

VocabPolicy RunConfig::vocab_policy() const {
  VocabPolicy p;
  p.max_vocab_size = static_cast<std::size_t>(max_vocab);
  p.min_count = min_count;
  return p;
}

LogRegConfig RunConfig::logreg_config() const {
  LogRegConfig c;
  c.l2 = l2;
  c.lr = classifier_lr;
  c.epochs = classifier_epochs;
  return c;
}

}  // namespace bpv
