#include "sdoc/stages.hpp"

#include <fstream>
#include <mutex>

#include <nlohmann/json.hpp>

#include "sdoc/error.hpp"
#include "sdoc/parallel.hpp"

namespace sdoc {

using nlohmann::json;

std::vector<std::pair<Query, Document>> shot_source_pairs(const Dataset& dataset) {
  std::vector<std::pair<Query, Document>> pairs;
  for (const auto& [query, gold] : dataset.queries) {
    const auto* retrieved = dataset.retrieved_for(query.id);
    if (!retrieved || retrieved->empty()) continue;
    pairs.emplace_back(query, retrieved->front());
  }
  return pairs;
}

DocType effective_self_doc_type(const AnswerConfig& config) {
  if (config.self_doc_type) return *config.self_doc_type;
  if (config.plan.style) return DocType::sfl(*config.plan.style);
  return DocType::genread();
}

namespace {

std::vector<Document> self_docs_for(const Query& query, const DocStore* store,
                                    const AnswerConfig& config) {
  if (!store) {
    raise(ErrorCode::InsufficientDocuments,
          "no document store given but the plan needs " + std::to_string(config.plan.n_self) +
              " self docs");
  }
  auto docs = store->docs_for(query.id, effective_self_doc_type(config));
  if (docs.size() < static_cast<size_t>(config.plan.n_self)) {
    raise(ErrorCode::InsufficientDocuments,
          "self: have " + std::to_string(docs.size()) + ", need " +
              std::to_string(config.plan.n_self) + " for query " + query.id);
  }
  return docs;
}

std::vector<Document> wiki_docs_for(const Query& query, const Dataset& dataset,
                                    const AnswerConfig& config) {
  const auto* retrieved = dataset.retrieved_for(query.id);
  const size_t have = retrieved ? retrieved->size() : 0;
  if (have < static_cast<size_t>(config.plan.k_wiki)) {
    raise(ErrorCode::InsufficientDocuments, "wiki: have " + std::to_string(have) + ", need " +
                                                std::to_string(config.plan.k_wiki) +
                                                " for query " + query.id);
  }
  return *retrieved;
}

}  // namespace

std::optional<std::string> build_background(const Query& query, const Dataset& dataset,
                                            const DocStore* store, const AnswerConfig& config,
                                            const PromptLibrary& prompts, LlmGateway& gateway,
                                            bool* truncated) {
  validate_plan(config.plan);
  const MixPlan& plan = config.plan;
  JoinPolicy policy;
  policy.max_chars = config.background_budget;

  std::vector<Document> mixed;
  switch (plan.strategy) {
    case MixStrategy::None:
      return std::nullopt;
    case MixStrategy::SelfOnly: {
      const auto docs = self_docs_for(query, store, config);
      mixed.assign(docs.begin(), docs.begin() + plan.n_self);
      break;
    }
    case MixStrategy::WikiOnly: {
      const auto docs = wiki_docs_for(query, dataset, config);
      mixed.assign(docs.begin(), docs.begin() + plan.k_wiki);
      break;
    }
    case MixStrategy::DirectMix: {
      mixed = direct_mix(wiki_docs_for(query, dataset, config),
                         self_docs_for(query, store, config), plan);
      break;
    }
    case MixStrategy::StyleTransformMix: {
      TransformConfig transform;
      transform.model_id = config.transform_model_id;
      transform.max_tokens = config.max_tokens;
      transform.parallelism = config.parallelism;
      mixed = style_transform_mix(wiki_docs_for(query, dataset, config),
                                  self_docs_for(query, store, config), plan, query.task, query.id,
                                  query.text, prompts, gateway, transform);
      break;
    }
  }
  return assemble_background(mixed, policy, truncated);
}

std::map<std::string, Answer> run_answers(const Dataset& dataset, const DocStore* store,
                                          const AnswerConfig& config, const PromptLibrary& prompts,
                                          LlmGateway& gateway) {
  validate_plan(config.plan);
  std::map<std::string, Answer> answers;
  std::mutex answers_mutex;

  parallel_for(dataset.queries.size(), config.parallelism, [&](size_t i) {
    const Query& query = dataset.queries[i].first;
    Answer answer;
    try {
      bool truncated = false;
      const auto background =
          build_background(query, dataset, store, config, prompts, gateway, &truncated);
      answer.truncated = truncated;
      const Prompt prompt = prompts.render_qa(query.task, background, query.text);
      ChatRequest request;
      request.model_id = config.model_id;
      if (prompt.system) {
        request.messages.push_back({"system", *prompt.system});
      }
      request.messages.push_back({"user", prompt.user});
      request.temperature = config.temperature;
      request.max_tokens = config.max_tokens;
      answer.text = gateway.chat(request, 0);
    } catch (const Error& e) {
      answer.failed = true;
      answer.error = e.what();
    }
    std::lock_guard<std::mutex> lock(answers_mutex);
    answers.emplace(query.id, std::move(answer));
  });
  return answers;
}

RunManifest answer_manifest(const AnswerConfig& config, const std::string& dataset_digest,
                            Task task, const std::string& template_digest) {
  RunManifest manifest;
  manifest.set("stage", std::string("answer"));
  manifest.set("task", task_token(task));
  manifest.set("dataset_digest", dataset_digest);
  manifest.set("template_digest", template_digest);
  manifest.set("strategy", mix_strategy_name(config.plan.strategy));
  manifest.set("k_wiki", static_cast<long>(config.plan.k_wiki));
  manifest.set("n_self", static_cast<long>(config.plan.n_self));
  manifest.set("order",
               std::string(config.plan.order == MixOrder::WikiFirst ? "wiki-first" : "self-first"));
  manifest.set("style", config.plan.style ? sfl_code(*config.plan.style) : std::string());
  manifest.set("self_doc_type", doc_type_code(effective_self_doc_type(config)));
  manifest.set("model_id", config.model_id);
  manifest.set("transform_model_id", config.transform_model_id);
  manifest.set("temperature", config.temperature);
  manifest.set("max_tokens", static_cast<long>(config.max_tokens));
  manifest.set("tool_version", std::string(SDOC_VERSION));
  return manifest;
}

void save_answers(const std::filesystem::path& path, const Dataset& dataset,
                  const std::map<std::string, Answer>& answers) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    raise(ErrorCode::IoError, "cannot write answers " + path.string());
  }
  for (const auto& [query, gold] : dataset.queries) {
    auto it = answers.find(query.id);
    if (it == answers.end()) continue;
    json record;
    record["id"] = query.id;
    if (it->second.failed) {
      record["failed"] = true;
      record["error"] = it->second.error;
    } else {
      record["answer"] = it->second.text;
    }
    if (it->second.truncated) {
      record["truncated"] = true;
    }
    out << record.dump() << "\n";
  }
}

std::map<std::string, Answer> load_answers(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    raise(ErrorCode::IoError, "cannot read answers " + path.string());
  }
  std::map<std::string, Answer> answers;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json record = json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.contains("id")) {
      raise(ErrorCode::SchemaError,
            path.string() + ":" + std::to_string(line_no) + ": bad answer record");
    }
    Answer answer;
    answer.truncated = record.value("truncated", false);
    if (record.value("failed", false)) {
      answer.failed = true;
      answer.error = record.value("error", "");
    } else if (record.contains("answer")) {
      answer.text = record["answer"].get<std::string>();
    } else {
      raise(ErrorCode::SchemaError,
            path.string() + ":" + std::to_string(line_no) + ": record has neither answer nor failed");
    }
    answers.emplace(record["id"].get<std::string>(), std::move(answer));
  }
  return answers;
}

void save_scores(const std::filesystem::path& path, const EvalResult& result) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    raise(ErrorCode::IoError, "cannot write scores " + path.string());
  }
  for (const auto& score : result.per_query) {
    json record{{"id", score.query_id},
                {"metric", score.metric == Metric::EM ? "EM" : "F1"},
                {"value", score.value},
                {"prediction", score.prediction},
                {"parse_status", parse_status_name(score.parse_status)}};
    out << record.dump() << "\n";
  }
}

}  // namespace sdoc
