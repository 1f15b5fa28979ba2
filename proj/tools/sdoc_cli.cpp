// sdoc: stage-granular pipeline driver.
//
// Subcommands mirror the pipeline stages (shots, generate, answer, eval)
// plus report assembly and audit export. Every stage is resumable: the
// response cache makes reruns free of backend traffic.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <nlohmann/json.hpp>

#include "sdoc/dataset_io.hpp"
#include "sdoc/error.hpp"
#include "sdoc/eval_harness.hpp"
#include "sdoc/knowledge_mix.hpp"
#include "sdoc/llm_gateway.hpp"
#include "sdoc/prompt_kit.hpp"
#include "sdoc/result_table.hpp"
#include "sdoc/selfdocs_gen.hpp"
#include "sdoc/stages.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitBackendExhausted = 3;
constexpr int kExitPartialFailure = 4;

struct CommonOptions {
  std::string config_path;
  std::string backend = "live";  // live | replay | record
  std::string fixtures;
  std::string cache_dir;
  std::string workdir = ".";
  std::string templates;
  std::string model = "qwen2.5-32b-instruct";
  std::string embed_model = "bge-large-en-v1.5";
  std::string transform_model = "gpt-4o";
  int parallelism = 8;
  int max_tokens = 1024;
  long limit = 500;
  double failure_threshold = 0.05;
};

// Config file values become defaults; flags override them.
void apply_config_file(CommonOptions& options) {
  if (options.config_path.empty()) return;
  std::ifstream in(options.config_path);
  if (!in) {
    sdoc::raise(sdoc::ErrorCode::IoError, "cannot read config " + options.config_path);
  }
  json config = json::parse(in, nullptr, false);
  if (config.is_discarded() || !config.is_object()) {
    sdoc::raise(sdoc::ErrorCode::SchemaError, options.config_path + ": not a JSON object");
  }
  options.backend = config.value("backend", options.backend);
  options.fixtures = config.value("fixtures", options.fixtures);
  options.cache_dir = config.value("cache_dir", options.cache_dir);
  options.workdir = config.value("workdir", options.workdir);
  options.templates = config.value("templates", options.templates);
  options.model = config.value("model", options.model);
  options.embed_model = config.value("embed_model", options.embed_model);
  options.transform_model = config.value("transform_model", options.transform_model);
  options.parallelism = config.value("parallelism", options.parallelism);
  options.max_tokens = config.value("max_tokens", options.max_tokens);
  options.limit = config.value("limit", options.limit);
  options.failure_threshold = config.value("failure_threshold", options.failure_threshold);
}

fs::path resolve(const CommonOptions& options, const std::string& path) {
  const fs::path p(path);
  return p.is_absolute() ? p : fs::path(options.workdir) / p;
}

fs::path cache_dir(const CommonOptions& options) {
  if (!options.cache_dir.empty()) return resolve(options, options.cache_dir);
  if (const char* env = std::getenv("SDOC_CACHE_DIR"); env && *env) return env;
  return fs::path(options.workdir) / "cache";
}

sdoc::LlmGateway make_gateway(const CommonOptions& options) {
  std::unique_ptr<sdoc::Backend> backend;
  if (options.backend == "live") {
    backend = sdoc::make_http_backend(sdoc::HttpBackendConfig::from_env());
  } else if (options.backend == "replay") {
    if (options.fixtures.empty()) {
      sdoc::raise(sdoc::ErrorCode::InvalidArgument, "--backend replay needs --fixtures");
    }
    backend = sdoc::make_replay_backend(resolve(options, options.fixtures));
  } else if (options.backend == "record") {
    if (options.fixtures.empty()) {
      sdoc::raise(sdoc::ErrorCode::InvalidArgument, "--backend record needs --fixtures");
    }
    backend = sdoc::make_recording_backend(
        sdoc::make_http_backend(sdoc::HttpBackendConfig::from_env()),
        resolve(options, options.fixtures));
  } else {
    sdoc::raise(sdoc::ErrorCode::UnknownCode, "unknown backend '" + options.backend + "'");
  }
  return sdoc::LlmGateway(std::move(backend), cache_dir(options));
}

sdoc::PromptLibrary load_prompts(const CommonOptions& options) {
  if (!options.templates.empty()) {
    return sdoc::PromptLibrary::load(resolve(options, options.templates));
  }
  return sdoc::PromptLibrary::load();
}

void print_stats(const sdoc::LlmGateway& gateway) {
  const auto& stats = gateway.stats();
  std::cerr << "backend=" << gateway.backend_name()
            << " chat_calls=" << stats.chat_backend_calls
            << " embed_calls=" << stats.embed_backend_calls
            << " cache_hits=" << (stats.chat_cache_hits + stats.embed_cache_hits) << "\n";
}

sdoc::GenerationConfig generation_config(const CommonOptions& common, int n, double temperature,
                                         int k, int m, std::uint64_t seed,
                                         const std::string& mode, const std::string& style) {
  sdoc::GenerationConfig config;
  config.n_docs = n;
  config.temperature = temperature;
  config.k_clusters = k;
  config.m_shots = m;
  config.seed = seed;
  config.model_id = common.model;
  config.embed_model_id = common.embed_model;
  config.transform_model_id = common.transform_model;
  config.max_tokens = common.max_tokens;
  config.failure_threshold = common.failure_threshold;
  config.parallelism = common.parallelism;
  config.mode = sdoc::parse_generation_mode(mode);
  if (!style.empty()) config.style = sdoc::parse_sfl_code(style);
  return config;
}

// --- shots --------------------------------------------------------------------

int cmd_shots(const CommonOptions& common, const std::string& dataset_path,
              const std::string& task_name, int k, int m, std::uint64_t seed,
              const std::string& style, const std::string& out) {
  const sdoc::Task task = sdoc::parse_task(task_name);
  const sdoc::Dataset dataset =
      sdoc::load_dataset(resolve(common, dataset_path), task, common.limit);
  const auto pairs = sdoc::shot_source_pairs(dataset);
  std::cerr << "shot source: " << pairs.size() << " (query, top-1 doc) pairs\n";

  sdoc::GenerationConfig config = generation_config(common, k, 0.95, k, m, seed, "genread", "");

  auto gateway = make_gateway(common);
  const auto prompts = load_prompts(common);
  sdoc::ShotPool pool = sdoc::build_shot_pool(pairs, config, gateway);
  if (!style.empty()) {
    pool = sdoc::style_align_shots(pool, sdoc::parse_sfl_code(style), task, prompts, gateway,
                                   config);
  }
  const fs::path out_path = resolve(common, out);
  sdoc::save_shot_pool(out_path, pool);

  sdoc::RunManifest manifest;
  manifest.set("stage", std::string("shots"));
  manifest.set("task", sdoc::task_token(task));
  manifest.set("dataset_digest", dataset.content_digest);
  manifest.set("template_digest", prompts.version_digest());
  manifest.set("k", static_cast<long>(k));
  manifest.set("m", static_cast<long>(m));
  manifest.set("seed", static_cast<long>(seed));
  manifest.set("style", style);
  manifest.set("embed_model_id", common.embed_model);
  manifest.set("transform_model_id", common.transform_model);
  manifest.set("tool_version", std::string(SDOC_VERSION));
  manifest.save(out_path.string() + ".manifest.json");

  print_stats(gateway);
  std::cout << "wrote " << out_path.string() << " (" << pool.shots.size() << " clusters x " << m
            << " shots)\n";
  return kExitOk;
}

// --- generate -----------------------------------------------------------------

int cmd_generate(const CommonOptions& common, const std::string& dataset_path,
                 const std::string& task_name, const std::string& pool_path,
                 const std::string& style, const std::string& mode, int n, double temperature,
                 int k, int m, std::uint64_t seed, const std::string& store_dir) {
  const sdoc::Task task = sdoc::parse_task(task_name);
  const sdoc::Dataset dataset =
      sdoc::load_dataset(resolve(common, dataset_path), task, common.limit);

  std::optional<sdoc::ShotPool> pool;
  std::string effective_mode = mode;
  if (!pool_path.empty()) {
    pool = sdoc::load_shot_pool(resolve(common, pool_path));
    effective_mode = "genread";
  } else if (effective_mode == "genread") {
    sdoc::raise(sdoc::ErrorCode::InvalidArgument,
                "few-shot generation needs --pool; use --mode zeroshot with --style otherwise");
  }

  sdoc::GenerationConfig config =
      generation_config(common, n, temperature, k, m, seed, effective_mode, style);
  if (pool) {
    config.k_clusters = static_cast<int>(pool->shots.size());
    config.m_shots = pool->shots.empty() ? 1 : static_cast<int>(pool->shots.front().size());
  }

  auto gateway = make_gateway(common);
  const auto prompts = load_prompts(common);
  const sdoc::RunManifest manifest =
      sdoc::generation_manifest(config, dataset.content_digest, task, prompts.version_digest());
  sdoc::DocStore store = sdoc::DocStore::create(resolve(common, store_dir), manifest);
  const sdoc::CorpusReport report = sdoc::generate_corpus(
      dataset, pool ? &*pool : nullptr, config, prompts, gateway, store);

  print_stats(gateway);
  std::cout << "store " << store.dir().string() << ": generated=" << report.generated
            << " cached=" << report.cached << " failures=" << report.failures.size()
            << " digest=" << store.content_digest().substr(0, 12) << "\n";
  if (report.failure_rate() > config.failure_threshold) {
    std::cerr << "failure rate " << report.failure_rate() << " exceeds threshold "
              << config.failure_threshold << "\n";
    return kExitPartialFailure;
  }
  return kExitOk;
}

// --- answer -------------------------------------------------------------------

int cmd_answer(const CommonOptions& common, const std::string& dataset_path,
               const std::string& task_name, const std::string& mix, int k, int n,
               const std::string& style, const std::string& order, const std::string& doc_type,
               const std::string& store_dir, const std::string& out, long budget) {
  const sdoc::Task task = sdoc::parse_task(task_name);
  const sdoc::Dataset dataset =
      sdoc::load_dataset(resolve(common, dataset_path), task, common.limit);

  sdoc::AnswerConfig config;
  config.plan.strategy = sdoc::parse_mix_strategy(mix);
  config.plan.k_wiki = k;
  config.plan.n_self = n;
  config.plan.order =
      order == "self-first" ? sdoc::MixOrder::SelfFirst : sdoc::MixOrder::WikiFirst;
  if (!style.empty()) config.plan.style = sdoc::parse_sfl_code(style);
  if (!doc_type.empty()) config.self_doc_type = sdoc::parse_doc_type_code(doc_type);
  config.model_id = common.model;
  config.transform_model_id = common.transform_model;
  config.max_tokens = common.max_tokens;
  config.parallelism = common.parallelism;
  if (budget > 0) config.background_budget = static_cast<size_t>(budget);

  const bool needs_store = config.plan.strategy == sdoc::MixStrategy::SelfOnly ||
                           config.plan.strategy == sdoc::MixStrategy::DirectMix ||
                           config.plan.strategy == sdoc::MixStrategy::StyleTransformMix;
  std::optional<sdoc::DocStore> store;
  if (needs_store) {
    store = sdoc::DocStore::open(resolve(common, store_dir));
  }

  auto gateway = make_gateway(common);
  const auto prompts = load_prompts(common);
  const auto answers =
      sdoc::run_answers(dataset, store ? &*store : nullptr, config, prompts, gateway);

  const fs::path out_path = resolve(common, out);
  sdoc::save_answers(out_path, dataset, answers);
  sdoc::RunManifest manifest =
      sdoc::answer_manifest(config, dataset.content_digest, task, prompts.version_digest());
  if (store) manifest.set("store_manifest", store->manifest_id());
  manifest.save(out_path.string() + ".manifest.json");

  size_t failed = 0;
  size_t truncated = 0;
  for (const auto& [id, answer] : answers) {
    if (answer.failed) ++failed;
    if (answer.truncated) ++truncated;
  }
  if (truncated > 0) {
    std::cerr << truncated << " backgrounds hit the character budget and were tail-truncated\n";
  }
  print_stats(gateway);
  std::cout << "wrote " << out_path.string() << " (" << answers.size() << " answers, " << failed
            << " failed)\n";
  if (!answers.empty() &&
      static_cast<double>(failed) / answers.size() > common.failure_threshold) {
    std::cerr << "failed answers exceed the threshold\n";
    return kExitPartialFailure;
  }
  return kExitOk;
}

// --- eval ---------------------------------------------------------------------

int cmd_eval(const CommonOptions& common, const std::string& dataset_path,
             const std::string& task_name, const std::string& answers_path,
             const std::string& label, const std::string& out, const std::string& csv,
             const std::string& baseline, const std::string& deltas) {
  const sdoc::Task task = sdoc::parse_task(task_name);
  const sdoc::Dataset dataset =
      sdoc::load_dataset(resolve(common, dataset_path), task, common.limit);
  const auto answers = sdoc::load_answers(resolve(common, answers_path));
  const sdoc::EvalResult result = sdoc::evaluate_run(dataset, answers);

  sdoc::ResultTable table;
  table.rows[label][task] = result.aggregate_percent;

  const fs::path out_path = resolve(common, out);
  sdoc::save_results(out_path, table);
  sdoc::save_scores(out_path.string() + ".scores.jsonl", result);
  if (!csv.empty()) {
    sdoc::write_results_csv(resolve(common, csv), table);
  }
  std::cout << label << " " << sdoc::task_label(task) << " = "
            << sdoc::format_one_decimal(result.aggregate_percent) << "\n";

  if (!baseline.empty()) {
    const sdoc::ResultTable base = sdoc::load_results(resolve(common, baseline));
    sdoc::ResultTable base_subset;
    for (const auto& [row_label, cells] : table.rows) {
      auto it = base.rows.find(row_label);
      if (it == base.rows.end()) {
        sdoc::raise(sdoc::ErrorCode::KeyMismatch, "baseline lacks row " + row_label);
      }
      auto cell = it->second.find(task);
      if (cell == it->second.end()) {
        sdoc::raise(sdoc::ErrorCode::KeyMismatch,
                    "baseline row " + row_label + " lacks " + sdoc::task_label(task));
      }
      base_subset.rows[row_label][task] = cell->second;
    }
    const sdoc::ResultTable delta = sdoc::delta_table(table, base_subset);
    const fs::path delta_path =
        deltas.empty() ? fs::path(out_path.string() + ".deltas.csv") : resolve(common, deltas);
    sdoc::write_results_csv(delta_path, delta, "Type", /*signed_cells=*/true);
    std::cout << "delta vs baseline = "
              << sdoc::format_signed_delta(delta.rows.at(label).at(task)) << " ("
              << delta_path.string() << ")\n";
  }
  return kExitOk;
}

// --- report -------------------------------------------------------------------

int cmd_report(const CommonOptions& common, const std::vector<std::string>& inputs,
               const std::string& out, const std::string& csv, bool dimensions,
               const std::string& baseline) {
  sdoc::ResultTable table;
  for (const auto& input : inputs) {
    const size_t eq = input.find('=');
    fs::path path;
    std::optional<std::string> forced_label;
    if (eq == std::string::npos) {
      path = resolve(common, input);
    } else {
      forced_label = input.substr(0, eq);
      path = resolve(common, input.substr(eq + 1));
    }
    const sdoc::ResultTable part = sdoc::load_results(path);
    for (const auto& [label, cells] : part.rows) {
      const std::string row_label = forced_label.value_or(label);
      for (const auto& [task, value] : cells) {
        table.rows[row_label][task] = value;
      }
    }
    for (const auto& manifest : part.manifests) {
      table.manifests.push_back(manifest);
    }
  }

  if (!out.empty()) sdoc::save_results(resolve(common, out), table);
  if (!csv.empty()) sdoc::write_results_csv(resolve(common, csv), table);
  if (dimensions) {
    const sdoc::ResultTable dims = sdoc::aggregate_dimensions(table);
    const fs::path dims_path = resolve(common, csv.empty() ? "dimensions.csv" : csv + ".dimensions.csv");
    sdoc::write_results_csv(dims_path, dims, "Dimension");
    std::cout << "wrote " << dims_path.string() << "\n";
  }
  if (!baseline.empty()) {
    const sdoc::ResultTable base = sdoc::load_results(resolve(common, baseline));
    const sdoc::ResultTable delta = sdoc::delta_table(table, base);
    const fs::path delta_path = resolve(common, csv.empty() ? "deltas.csv" : csv + ".deltas.csv");
    sdoc::write_results_csv(delta_path, delta, "Type", /*signed_cells=*/true);
    std::cout << "wrote " << delta_path.string() << "\n";
  }
  std::cout << "report covers " << table.rows.size() << " rows\n";
  return kExitOk;
}

// --- audit --------------------------------------------------------------------

int cmd_audit(const CommonOptions& common, const std::string& store_dir, int per_type,
              std::uint64_t seed, const std::string& out) {
  const sdoc::DocStore store = sdoc::DocStore::open(resolve(common, store_dir));
  const auto rows = sdoc::audit_sample(store.all_docs(), per_type, seed);
  sdoc::write_audit_csv(resolve(common, out), rows);
  std::cout << "wrote " << out << " (" << rows.size() << " rows, " << per_type
            << " per type)\n";
  return kExitOk;
}

int dispatch_error(const sdoc::Error& e) {
  std::cerr << "error: " << e.what() << "\n";
  return e.code() == sdoc::ErrorCode::BackendExhausted ? kExitBackendExhausted : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"self-doc generation, mixing, and evaluation pipeline"};
  app.require_subcommand(1);

  CommonOptions common;
  // pre-scan for --config so file values become defaults under the flags
  for (int i = 1; i + 1 <= argc - 1; ++i) {
    if (std::string(argv[i]) == "--config") {
      common.config_path = argv[i + 1];
    }
  }
  try {
    apply_config_file(common);
  } catch (const sdoc::Error& e) {
    return dispatch_error(e);
  }

  app.add_option("--config", common.config_path, "JSON config file; flags override its values");
  app.add_option("--backend", common.backend, "live | replay | record")
      ->check(CLI::IsMember({"live", "replay", "record"}));
  app.add_option("--fixtures", common.fixtures, "trace file for replay/record backends");
  app.add_option("--cache-dir", common.cache_dir, "response cache directory");
  app.add_option("--workdir", common.workdir, "base directory for relative paths");
  app.add_option("--templates", common.templates, "prompt template directory");
  app.add_option("--model", common.model, "chat model id");
  app.add_option("--embed-model", common.embed_model, "embedding model id");
  app.add_option("--transform-model", common.transform_model, "style transformation model id");
  app.add_option("--parallelism", common.parallelism, "max in-flight requests");
  app.add_option("--max-tokens", common.max_tokens, "completion token limit");
  app.add_option("--limit", common.limit, "dataset truncation (first N records)");
  app.add_option("--failure-threshold", common.failure_threshold,
                 "tolerated per-run failure rate");

  // shots
  auto* shots = app.add_subcommand("shots", "build (and optionally style-align) the shot pool");
  std::string dataset_path, task_name, style, out_path;
  int k = 10, m = 5;
  std::uint64_t seed = 0;
  shots->add_option("--dataset", dataset_path)->required();
  shots->add_option("--task", task_name)->required();
  shots->add_option("--k", k, "number of clusters");
  shots->add_option("--m", m, "shots per cluster");
  shots->add_option("--seed", seed);
  shots->add_option("--style", style, "align shots to this SFL code");
  shots->add_option("--out", out_path)->default_val("pool.json");

  // generate
  auto* generate = app.add_subcommand("generate", "generate the self-doc corpus");
  std::string pool_path, gen_mode = "genread", store_dir = "store";
  int n = 10;
  double temperature = 0.95;
  generate->add_option("--dataset", dataset_path)->required();
  generate->add_option("--task", task_name)->required();
  generate->add_option("--pool", pool_path, "shot pool from the shots stage");
  generate->add_option("--style", style, "SFL code (typed zero-shot mode)");
  generate->add_option("--mode", gen_mode)->check(CLI::IsMember({"genread", "zeroshot"}));
  generate->add_option("--n", n, "documents per query");
  generate->add_option("--temperature", temperature);
  generate->add_option("--k", k, "clusters (when no pool file is given)");
  generate->add_option("--m", m, "shots per cluster (when no pool file is given)");
  generate->add_option("--seed", seed);
  generate->add_option("--store", store_dir, "document store directory");

  // answer
  auto* answer = app.add_subcommand("answer", "mix backgrounds and answer every query");
  std::string mix = "self-only", order = "wiki-first", doc_type, answers_out = "answers.jsonl";
  long budget = 0;
  answer->add_option("--dataset", dataset_path)->required();
  answer->add_option("--task", task_name)->required();
  answer->add_option("--mix", mix)
      ->check(CLI::IsMember({"none", "self-only", "wiki-only", "direct", "style"}));
  answer->add_option("--k", k, "wiki documents");
  answer->add_option("--n", n, "self documents");
  answer->add_option("--style", style, "SFL code for doc selection / transformation");
  answer->add_option("--order", order)->check(CLI::IsMember({"wiki-first", "self-first"}));
  answer->add_option("--doc-type", doc_type, "override which stored docs to use");
  answer->add_option("--store", store_dir, "document store directory");
  answer->add_option("--out", answers_out);
  answer->add_option("--budget", budget, "background character budget (0 = unlimited)");

  // eval
  auto* eval = app.add_subcommand("eval", "score an answers file");
  std::string answers_path, label = "run", results_out = "results.json", results_csv, baseline,
              deltas;
  eval->add_option("--dataset", dataset_path)->required();
  eval->add_option("--task", task_name)->required();
  eval->add_option("--answers", answers_path)->required();
  eval->add_option("--label", label, "row label for the results table");
  eval->add_option("--out", results_out);
  eval->add_option("--csv", results_csv);
  eval->add_option("--baseline", baseline, "results.json to diff against");
  eval->add_option("--deltas", deltas, "delta CSV path");

  // report
  auto* report = app.add_subcommand("report", "assemble tables from results files");
  std::vector<std::string> report_inputs;
  std::string report_out, report_csv;
  bool report_dimensions = false;
  report->add_option("--results", report_inputs, "results.json, optionally LABEL=path")
      ->required();
  report->add_option("--out", report_out, "merged results.json");
  report->add_option("--csv", report_csv, "table CSV path");
  report->add_flag("--dimensions", report_dimensions, "also write the dimension table");
  report->add_option("--baseline", baseline, "results.json to diff against");

  // audit
  auto* audit = app.add_subcommand("audit", "export a seeded review sample from a store");
  int per_type = 15;
  std::string audit_out = "audit.csv";
  audit->add_option("--store", store_dir)->required();
  audit->add_option("--per-type", per_type);
  audit->add_option("--seed", seed);
  audit->add_option("--out", audit_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (shots->parsed()) {
      return cmd_shots(common, dataset_path, task_name, k, m, seed, style, out_path);
    }
    if (generate->parsed()) {
      return cmd_generate(common, dataset_path, task_name, pool_path, style, gen_mode, n,
                          temperature, k, m, seed, store_dir);
    }
    if (answer->parsed()) {
      return cmd_answer(common, dataset_path, task_name, mix, k, n, style, order, doc_type,
                        store_dir, answers_out, budget);
    }
    if (eval->parsed()) {
      return cmd_eval(common, dataset_path, task_name, answers_path, label, results_out,
                      results_csv, baseline, deltas);
    }
    if (report->parsed()) {
      return cmd_report(common, report_inputs, report_out, report_csv, report_dimensions,
                        baseline);
    }
    if (audit->parsed()) {
      return cmd_audit(common, store_dir, per_type, seed, audit_out);
    }
  } catch (const sdoc::Error& e) {
    return dispatch_error(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}
