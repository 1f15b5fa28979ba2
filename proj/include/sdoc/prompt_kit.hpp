#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sdoc/core.hpp"

namespace sdoc {

struct Prompt {
  std::optional<std::string> system;
  std::string user;

  bool operator==(const Prompt&) const = default;
};

enum class PromptFamily { StyleTransform, Generation, GenRead, QA, QANoRag };

std::string prompt_family_token(PromptFamily family);

struct TemplateKey {
  PromptFamily family;
  Task task;
  std::optional<SflType> style;  // required for StyleTransform/Generation

  // File name for this key: <family>_<task>[_<STYLE>].txt
  std::string file_name() const;

  auto operator<=>(const TemplateKey&) const = default;
};

// A (query_text, document_text) exemplar used by few-shot generation.
struct Shot {
  std::string query_id;
  std::string query_text;
  std::string document_text;

  bool operator==(const Shot&) const = default;
};

// Loads the prompt template data files once and renders every prompt
// family from them. Rendering is pure; argument text is spliced in
// verbatim with no escaping, and substituted text is never re-scanned
// for placeholders.
class PromptLibrary {
 public:
  // dir defaults to the data/templates directory this build was configured
  // with; SDOC_TEMPLATES overrides it.
  static PromptLibrary load(std::filesystem::path dir = default_dir());
  static std::filesystem::path default_dir();

  const std::filesystem::path& dir() const { return dir_; }

  // Raw template text exactly as stored on disk (placeholders intact).
  const std::string& raw(const TemplateKey& key) const;
  bool is_reconstructed(const TemplateKey& key) const;
  std::vector<TemplateKey> keys() const;

  // Digest over every template file (name + bytes); changes when any
  // template byte changes. Recorded in run manifests.
  const std::string& version_digest() const { return version_digest_; }

  Prompt render_style_transform(Task task, SflType style, const std::string& context,
                                const std::string& query) const;
  Prompt render_generation(Task task, SflType style, const std::string& query) const;
  // shots: 1..5 exemplars; the rendered prompt ends with the instruction and
  // the bare target query.
  Prompt render_genread(Task task, const std::vector<Shot>& shots,
                        const std::string& target_query) const;
  // background absent renders the no-context variant.
  Prompt render_qa(Task task, const std::optional<std::string>& background,
                   const std::string& query) const;

 private:
  struct Parsed {
    std::optional<std::string> system;
    std::string user;  // placeholders intact
  };

  const Parsed& parsed(const TemplateKey& key) const;

  std::filesystem::path dir_;
  std::map<TemplateKey, Parsed> templates_;
  std::set<std::string> reconstructed_;
  std::string version_digest_;
};

}  // namespace sdoc
