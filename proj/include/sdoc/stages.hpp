#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "sdoc/dataset_io.hpp"
#include "sdoc/eval_harness.hpp"
#include "sdoc/knowledge_mix.hpp"
#include "sdoc/selfdocs_gen.hpp"

namespace sdoc {

// Pipeline stages behind the CLI subcommands. Each stage is idempotent
// under rerun with a warm cache.

// Pairs every dataset query with its top-1 retrieval; queries without
// retrievals are skipped.
std::vector<std::pair<Query, Document>> shot_source_pairs(const Dataset& dataset);

struct AnswerConfig {
  MixPlan plan;
  std::string model_id = "qwen2.5-32b-instruct";
  std::string transform_model_id = "gpt-4o";
  double temperature = 0.0;  // greedy decoding for answering
  int max_tokens = 1024;
  int parallelism = 8;
  // Which generated documents to pull from the store; defaults to the
  // plan's style, else untyped background docs.
  std::optional<DocType> self_doc_type;
  std::optional<size_t> background_budget;
};

DocType effective_self_doc_type(const AnswerConfig& config);

// Builds the mixed background for one query per the plan. Strategy None
// yields nullopt (the no-context prompt).
std::optional<std::string> build_background(const Query& query, const Dataset& dataset,
                                            const DocStore* store, const AnswerConfig& config,
                                            const PromptLibrary& prompts, LlmGateway& gateway,
                                            bool* truncated = nullptr);

// Answers every dataset query; per-query errors become failed answers
// rather than aborting the run.
std::map<std::string, Answer> run_answers(const Dataset& dataset, const DocStore* store,
                                          const AnswerConfig& config, const PromptLibrary& prompts,
                                          LlmGateway& gateway);

RunManifest answer_manifest(const AnswerConfig& config, const std::string& dataset_digest,
                            Task task, const std::string& template_digest);

// answers.jsonl: {"id": ..., "answer": ...} or {"id": ..., "failed": true,
// "error": ...} per line, dataset order.
void save_answers(const std::filesystem::path& path, const Dataset& dataset,
                  const std::map<std::string, Answer>& answers);
std::map<std::string, Answer> load_answers(const std::filesystem::path& path);

// Per-query scores as JSONL, sorted by query id.
void save_scores(const std::filesystem::path& path, const EvalResult& result);

}  // namespace sdoc
