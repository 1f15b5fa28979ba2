#include "sdoc/knowledge_mix.hpp"

#include <algorithm>

#include "sdoc/digest.hpp"
#include "sdoc/error.hpp"
#include "sdoc/parallel.hpp"

namespace sdoc {

namespace {

void check_counts(std::span<const Document> wiki, std::span<const Document> self_docs,
                  const MixPlan& plan) {
  if (plan.k_wiki < 0 || plan.n_self < 0) {
    raise(ErrorCode::InvalidArgument, "mix counts must be non-negative");
  }
  if (wiki.size() < static_cast<size_t>(plan.k_wiki)) {
    raise(ErrorCode::InsufficientDocuments, "wiki: have " + std::to_string(wiki.size()) +
                                                ", need " + std::to_string(plan.k_wiki));
  }
  if (self_docs.size() < static_cast<size_t>(plan.n_self)) {
    raise(ErrorCode::InsufficientDocuments, "self: have " + std::to_string(self_docs.size()) +
                                                ", need " + std::to_string(plan.n_self));
  }
  for (size_t i = 0; i < static_cast<size_t>(plan.k_wiki); ++i) {
    if (!wiki[i].rank) {
      raise(ErrorCode::InvalidArgument, "wiki document " + wiki[i].id + " has no rank");
    }
    if (i > 0 && *wiki[i - 1].rank > *wiki[i].rank) {
      raise(ErrorCode::InvalidArgument, "wiki documents must be sorted by ascending rank");
    }
  }
}

std::vector<Document> concat_in_order(std::vector<Document> wiki_part,
                                      std::vector<Document> self_part, MixOrder order) {
  std::vector<Document> out;
  out.reserve(wiki_part.size() + self_part.size());
  if (order == MixOrder::WikiFirst) {
    out.insert(out.end(), wiki_part.begin(), wiki_part.end());
    out.insert(out.end(), self_part.begin(), self_part.end());
  } else {
    out.insert(out.end(), self_part.begin(), self_part.end());
    out.insert(out.end(), wiki_part.begin(), wiki_part.end());
  }
  return out;
}

// Back off to the previous UTF-8 sequence start so a cut never splits a
// code point.
size_t utf8_floor(const std::string& text, size_t pos) {
  while (pos > 0 && (static_cast<unsigned char>(text[pos]) & 0xc0) == 0x80) {
    --pos;
  }
  return pos;
}

}  // namespace

MixStrategy parse_mix_strategy(std::string_view name) {
  std::string n(name);
  std::transform(n.begin(), n.end(), n.begin(), [](unsigned char c) { return std::tolower(c); });
  if (n == "self-only" || n == "selfonly" || n == "self") return MixStrategy::SelfOnly;
  if (n == "wiki-only" || n == "wikionly" || n == "wiki") return MixStrategy::WikiOnly;
  if (n == "direct" || n == "directmix") return MixStrategy::DirectMix;
  if (n == "style" || n == "styletransformmix") return MixStrategy::StyleTransformMix;
  if (n == "none") return MixStrategy::None;
  raise(ErrorCode::UnknownCode, "unknown mix strategy '" + std::string(name) + "'");
}

std::string mix_strategy_name(MixStrategy strategy) {
  switch (strategy) {
    case MixStrategy::SelfOnly: return "self-only";
    case MixStrategy::WikiOnly: return "wiki-only";
    case MixStrategy::DirectMix: return "direct";
    case MixStrategy::StyleTransformMix: return "style";
    case MixStrategy::None: return "none";
  }
  raise(ErrorCode::InvalidArgument, "unknown mix strategy");
}

void validate_plan(const MixPlan& plan) {
  switch (plan.strategy) {
    case MixStrategy::None:
      break;
    case MixStrategy::SelfOnly:
      if (plan.n_self < 1) raise(ErrorCode::InvalidArgument, "self-only needs n >= 1");
      break;
    case MixStrategy::WikiOnly:
      if (plan.k_wiki < 1) raise(ErrorCode::InvalidArgument, "wiki-only needs k >= 1");
      break;
    case MixStrategy::DirectMix:
      if (plan.k_wiki < 1 || plan.n_self < 1) {
        raise(ErrorCode::InvalidArgument, "direct mix needs k >= 1 and n >= 1");
      }
      break;
    case MixStrategy::StyleTransformMix:
      if (plan.k_wiki < 1 || plan.n_self < 1) {
        raise(ErrorCode::InvalidArgument, "style mix needs k >= 1 and n >= 1");
      }
      if (!plan.style) {
        raise(ErrorCode::InvalidArgument, "style mix needs a target style");
      }
      break;
  }
}

std::vector<Document> direct_mix(std::span<const Document> wiki,
                                 std::span<const Document> self_docs, const MixPlan& plan) {
  check_counts(wiki, self_docs, plan);
  std::vector<Document> wiki_part(wiki.begin(), wiki.begin() + plan.k_wiki);
  std::vector<Document> self_part(self_docs.begin(), self_docs.begin() + plan.n_self);
  return concat_in_order(std::move(wiki_part), std::move(self_part), plan.order);
}

std::vector<Document> style_transform_mix(std::span<const Document> wiki,
                                          std::span<const Document> self_docs, const MixPlan& plan,
                                          Task task, const std::string& query_id,
                                          const std::string& query_text,
                                          const PromptLibrary& prompts, LlmGateway& gateway,
                                          const TransformConfig& config) {
  if (!plan.style) {
    raise(ErrorCode::InvalidArgument, "style transform mix needs a target style");
  }
  check_counts(wiki, self_docs, plan);

  std::vector<Document> wiki_part(plan.k_wiki);
  parallel_for(static_cast<size_t>(plan.k_wiki), config.parallelism, [&](size_t i) {
    const Document& source = wiki[i];
    const Prompt prompt =
        prompts.render_style_transform(task, *plan.style, source.text, query_text);
    ChatRequest request;
    request.model_id = config.model_id;
    if (prompt.system) {
      request.messages.push_back({"system", *prompt.system});
    }
    request.messages.push_back({"user", prompt.user});
    request.temperature = config.temperature;
    request.max_tokens = config.max_tokens;
    const std::string rewritten = gateway.chat(request, 0);

    Document doc;
    doc.id = digest_fields({std::string_view(query_id), std::string_view(sfl_code(*plan.style)),
                            std::string_view(std::to_string(*source.rank)),
                            std::string_view(source.id)});
    doc.text = rewritten;
    doc.doc_type = DocType::sfl(*plan.style);
    doc.source = DocSource::StyleTransformed;
    doc.origin_query_id = query_id;
    doc.rank = source.rank;
    wiki_part[i] = std::move(doc);
  });

  std::vector<Document> self_part(self_docs.begin(), self_docs.begin() + plan.n_self);
  return concat_in_order(std::move(wiki_part), std::move(self_part), plan.order);
}

std::string assemble_background(std::span<const Document> docs, const JoinPolicy& policy,
                                bool* truncated) {
  if (truncated) *truncated = false;
  if (docs.empty()) {
    raise(ErrorCode::InvalidArgument, "cannot assemble a background from zero documents");
  }
  std::string out;
  for (size_t i = 0; i < docs.size(); ++i) {
    if (i > 0) out += policy.separator;
    out += docs[i].text;
  }
  if (policy.max_chars && out.size() > *policy.max_chars) {
    out.resize(utf8_floor(out, *policy.max_chars));
    if (truncated) *truncated = true;
  }
  return out;
}

}  // namespace sdoc
