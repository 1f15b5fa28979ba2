#pragma once

#include <string>
#include <vector>

#include "sdoc/core.hpp"
#include "sdoc/prompt_kit.hpp"

namespace sdoc::test {

// Sentinel arguments baked into the golden files. Keep in sync with the
// values the goldens were rendered with.
inline std::string sentinel_query(Task task) { return "[SAMPLE QUERY " + task_label(task) + "]"; }
inline std::string sentinel_context() { return "[SAMPLE CONTEXT]"; }
inline std::string sentinel_background() { return "[SAMPLE BACKGROUND]"; }

inline std::vector<Shot> sentinel_shots() {
  std::vector<Shot> shots;
  for (int i = 1; i <= 5; ++i) {
    shots.push_back(Shot{"shot-" + std::to_string(i), "[SHOT QUERY " + std::to_string(i) + "]",
                         "[SHOT CONTEXT " + std::to_string(i) + "]"});
  }
  return shots;
}
inline std::string sentinel_target() { return "[TARGET QUERY]"; }

// Re-assembles the on-disk box layout from a rendered prompt so it can be
// byte-compared with the golden file. Only the generation family prints an
// explicit "User: " marker.
inline std::string box_layout(const Prompt& prompt, PromptFamily family) {
  std::string out;
  if (prompt.system) {
    out += "System: " + *prompt.system + "\n\n";
    if (family == PromptFamily::Generation) {
      out += "User: ";
    }
  }
  out += prompt.user;
  return out;
}

// Renders the key with the sentinel arguments.
inline Prompt render_with_sentinels(const PromptLibrary& lib, const TemplateKey& key) {
  switch (key.family) {
    case PromptFamily::StyleTransform:
      return lib.render_style_transform(key.task, *key.style, sentinel_context(),
                                        sentinel_query(key.task));
    case PromptFamily::Generation:
      return lib.render_generation(key.task, *key.style, sentinel_query(key.task));
    case PromptFamily::GenRead:
      return lib.render_genread(key.task, sentinel_shots(), sentinel_target());
    case PromptFamily::QA:
      return lib.render_qa(key.task, sentinel_background(), sentinel_query(key.task));
    case PromptFamily::QANoRag:
      return lib.render_qa(key.task, std::nullopt, sentinel_query(key.task));
  }
  return {};
}

}  // namespace sdoc::test
