#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sdoc/core.hpp"
#include "sdoc/llm_gateway.hpp"
#include "sdoc/prompt_kit.hpp"

namespace sdoc {

enum class MixStrategy { SelfOnly, WikiOnly, DirectMix, StyleTransformMix, None };

MixStrategy parse_mix_strategy(std::string_view name);
std::string mix_strategy_name(MixStrategy strategy);

enum class MixOrder { WikiFirst, SelfFirst };

struct MixPlan {
  MixStrategy strategy = MixStrategy::DirectMix;
  int k_wiki = 0;
  int n_self = 0;
  MixOrder order = MixOrder::WikiFirst;
  std::optional<SflType> style;  // StyleTransformMix only
};

// Throws InvalidArgument when counts or style do not fit the strategy.
void validate_plan(const MixPlan& plan);

// Top-k wiki documents (ascending rank) and first-n self documents,
// concatenated in plan order with texts untouched. Output length is exactly
// k_wiki + n_self.
std::vector<Document> direct_mix(std::span<const Document> wiki,
                                 std::span<const Document> self_docs, const MixPlan& plan);

// Settings for the wiki-rewrite calls issued by style_transform_mix.
struct TransformConfig {
  std::string model_id;
  int max_tokens = 1024;
  double temperature = 0.0;
  int parallelism = 8;
};

// As direct_mix, but each selected wiki document is first rewritten into
// plan.style by the chat backend, prompted with the target query. Any
// rewrite failure fails the whole mix for this query.
std::vector<Document> style_transform_mix(std::span<const Document> wiki,
                                          std::span<const Document> self_docs, const MixPlan& plan,
                                          Task task, const std::string& query_id,
                                          const std::string& query_text,
                                          const PromptLibrary& prompts, LlmGateway& gateway,
                                          const TransformConfig& config);

struct JoinPolicy {
  std::string separator = "\n\n";
  std::optional<size_t> max_chars;  // tail-truncate beyond this budget
};

// Joins document texts in list order. When the budget cuts inside a
// document the cut backs off to a UTF-8 boundary and *truncated is set.
std::string assemble_background(std::span<const Document> docs, const JoinPolicy& policy = {},
                                bool* truncated = nullptr);

}  // namespace sdoc
