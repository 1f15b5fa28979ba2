#include "sdoc/prompt_kit.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "sdoc/digest.hpp"
#include "sdoc/error.hpp"

namespace sdoc {

namespace {

constexpr const char* kSystemMarker = "System: ";
constexpr const char* kUserMarker = "User: ";
// Shot blocks in the few-shot template are separated by four newlines.
constexpr const char* kBlockSeparator = "\n\n\n\n";

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    raise(ErrorCode::IoError, "cannot read " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  // Template files are stored with one trailing newline; the template
  // itself ends at the last content byte.
  if (!text.empty() && text.back() == '\n') {
    text.pop_back();
  }
  return text;
}

// Single left-to-right pass over the template. Substituted argument text is
// appended verbatim and never re-scanned, so arguments containing literal
// placeholder markers survive unchanged.
std::string substitute(const std::string& templ,
                       const std::vector<std::pair<std::string, std::string>>& args) {
  std::string out;
  out.reserve(templ.size());
  size_t i = 0;
  while (i < templ.size()) {
    bool matched = false;
    if (templ[i] == '{') {
      for (const auto& [marker, value] : args) {
        if (templ.compare(i, marker.size(), marker) == 0) {
          out.append(value);
          i += marker.size();
          matched = true;
          break;
        }
      }
    }
    if (!matched) {
      out.push_back(templ[i]);
      ++i;
    }
  }
  return out;
}

std::vector<std::string> split_on(const std::string& text, const std::string& sep) {
  std::vector<std::string> parts;
  size_t start = 0;
  while (true) {
    size_t pos = text.find(sep, start);
    if (pos == std::string::npos) {
      parts.push_back(text.substr(start));
      break;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + sep.size();
  }
  return parts;
}

}  // namespace

std::string prompt_family_token(PromptFamily family) {
  switch (family) {
    case PromptFamily::StyleTransform: return "styletransform";
    case PromptFamily::Generation: return "generation";
    case PromptFamily::GenRead: return "genread";
    case PromptFamily::QA: return "qa";
    case PromptFamily::QANoRag: return "qanorag";
  }
  raise(ErrorCode::InvalidArgument, "unknown prompt family");
}

std::string TemplateKey::file_name() const {
  std::string name = prompt_family_token(family) + "_" + task_token(task);
  if (style) {
    name += "_" + sfl_code(*style);
  }
  return name + ".txt";
}

std::filesystem::path PromptLibrary::default_dir() {
  if (const char* env = std::getenv("SDOC_TEMPLATES"); env && *env) {
    return env;
  }
  return SDOC_DEFAULT_TEMPLATE_DIR;
}

PromptLibrary PromptLibrary::load(std::filesystem::path dir) {
  PromptLibrary lib;
  lib.dir_ = dir;

  std::vector<TemplateKey> keys;
  for (Task task : all_tasks()) {
    for (SflType style : all_sfl_types()) {
      keys.push_back({PromptFamily::StyleTransform, task, style});
      keys.push_back({PromptFamily::Generation, task, style});
    }
    keys.push_back({PromptFamily::GenRead, task, std::nullopt});
    keys.push_back({PromptFamily::QA, task, std::nullopt});
    keys.push_back({PromptFamily::QANoRag, task, std::nullopt});
  }

  std::vector<std::string> digest_input;
  for (const auto& key : keys) {
    const std::string file = key.file_name();
    const std::string text = read_file(dir / file);
    Parsed parsed;
    std::string rest = text;
    if (rest.rfind(kSystemMarker, 0) == 0) {
      size_t split = rest.find("\n\n");
      if (split == std::string::npos) {
        raise(ErrorCode::SchemaError, file + ": system marker without a user section");
      }
      parsed.system = rest.substr(std::string(kSystemMarker).size(),
                                  split - std::string(kSystemMarker).size());
      rest = rest.substr(split + 2);
    }
    // A leading role marker on the user section is layout, not content;
    // an inline "User:" after {background} is content and stays.
    if (rest.rfind(kUserMarker, 0) == 0) {
      rest = rest.substr(std::string(kUserMarker).size());
    }
    parsed.user = rest;
    if (parsed.user.empty()) {
      raise(ErrorCode::SchemaError, file + ": empty user template");
    }
    lib.templates_.emplace(key, std::move(parsed));
    digest_input.push_back(file);
    digest_input.push_back(text);
  }

  const auto recon_path = dir / "reconstructed.txt";
  if (std::filesystem::exists(recon_path)) {
    std::ifstream in(recon_path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      lib.reconstructed_.insert(line);
    }
  }

  lib.version_digest_ = digest_fields(digest_input);
  return lib;
}

const PromptLibrary::Parsed& PromptLibrary::parsed(const TemplateKey& key) const {
  auto it = templates_.find(key);
  if (it == templates_.end()) {
    raise(ErrorCode::UnknownCode, "no template for " + key.file_name());
  }
  return it->second;
}

const std::string& PromptLibrary::raw(const TemplateKey& key) const { return parsed(key).user; }

bool PromptLibrary::is_reconstructed(const TemplateKey& key) const {
  return reconstructed_.count(key.file_name()) > 0;
}

std::vector<TemplateKey> PromptLibrary::keys() const {
  std::vector<TemplateKey> out;
  out.reserve(templates_.size());
  for (const auto& [key, value] : templates_) {
    out.push_back(key);
  }
  return out;
}

Prompt PromptLibrary::render_style_transform(Task task, SflType style, const std::string& context,
                                             const std::string& query) const {
  if (context.empty()) {
    raise(ErrorCode::InvalidArgument, "style transform context must be non-empty");
  }
  if (query.empty()) {
    raise(ErrorCode::InvalidArgument, "style transform query must be non-empty");
  }
  const Parsed& t = parsed({PromptFamily::StyleTransform, task, style});
  Prompt prompt;
  prompt.system = t.system;
  prompt.user = substitute(t.user, {{"{context}", context}, {"{query}", query}, {"{claim}", query}});
  return prompt;
}

Prompt PromptLibrary::render_generation(Task task, SflType style, const std::string& query) const {
  if (query.empty()) {
    raise(ErrorCode::InvalidArgument, "generation query must be non-empty");
  }
  const Parsed& t = parsed({PromptFamily::Generation, task, style});
  Prompt prompt;
  prompt.system = t.system;
  prompt.user = substitute(t.user, {{"{query}", query}, {"{claim}", query}});
  return prompt;
}

Prompt PromptLibrary::render_genread(Task task, const std::vector<Shot>& shots,
                                     const std::string& target_query) const {
  if (target_query.empty()) {
    raise(ErrorCode::InvalidArgument, "genread target query must be non-empty");
  }
  if (shots.empty()) {
    raise(ErrorCode::InvalidArgument, "genread requires at least one shot");
  }
  if (shots.size() > 5) {
    raise(ErrorCode::TooManyShots,
          "genread template holds at most 5 shots, got " + std::to_string(shots.size()));
  }
  const Parsed& t = parsed({PromptFamily::GenRead, task, std::nullopt});
  const auto blocks = split_on(t.user, kBlockSeparator);
  // Template layout: five identical shot blocks, then the target block.
  if (blocks.size() < 2) {
    raise(ErrorCode::SchemaError, "genread template is not block-structured");
  }
  const std::string& shot_block = blocks.front();
  const std::string& target_block = blocks.back();

  std::string out;
  for (const auto& shot : shots) {
    out += substitute(shot_block, {{"{query}", shot.query_text},
                                   {"{wiki top1 context}", shot.document_text}});
    out += kBlockSeparator;
  }
  out += substitute(target_block, {{"{query}", target_query}});

  Prompt prompt;
  prompt.system = t.system;
  prompt.user = std::move(out);
  return prompt;
}

Prompt PromptLibrary::render_qa(Task task, const std::optional<std::string>& background,
                                const std::string& query) const {
  if (query.empty()) {
    raise(ErrorCode::InvalidArgument, "qa query must be non-empty");
  }
  const PromptFamily family = background ? PromptFamily::QA : PromptFamily::QANoRag;
  const Parsed& t = parsed({family, task, std::nullopt});
  std::vector<std::pair<std::string, std::string>> args = {{"{query}", query}, {"{claim}", query}};
  if (background) {
    args.push_back({"{background}", *background});
  }
  Prompt prompt;
  prompt.system = t.system;
  prompt.user = substitute(t.user, args);
  return prompt;
}

}  // namespace sdoc
