#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "docsimp/llm.hpp"

namespace docsimp {

enum class TemplateName {
  summarizer,
  paragraph_simplifier,
  discourse,
  discourse_single_paragraph,
  topic,
  lexical,
  cot_generator,
  judge,
  p1,
  p2,
  ic,
};

inline constexpr std::array<TemplateName, 11> kAllTemplates = {
    TemplateName::summarizer, TemplateName::paragraph_simplifier,
    TemplateName::discourse,  TemplateName::discourse_single_paragraph,
    TemplateName::topic,      TemplateName::lexical,
    TemplateName::cot_generator, TemplateName::judge,
    TemplateName::p1,         TemplateName::p2,
    TemplateName::ic,
};

std::string_view to_string(TemplateName name) noexcept;
std::optional<TemplateName> template_from_string(std::string_view name);

// Line holding example blocks; not a bound placeholder.
inline constexpr std::string_view kExamplesSlot = "[Examples]";

struct PromptTemplate {
  TemplateName name = TemplateName::summarizer;
  std::string system_text;
  std::string user_text;  // placeholders look like [UPPER_SNAKE]
  std::set<std::string> required_placeholders;

  /// Number of "[Examples]" lines in user_text.
  int example_slots() const;
};

/// Placeholder names occurring in a text, in the [UPPER_SNAKE] form.
std::set<std::string> find_placeholders(std::string_view text);

/// Builds a template and derives required_placeholders from its texts.
PromptTemplate make_template(TemplateName name, std::string system_text, std::string user_text);

/// Digest of name, system text and user text.
std::string template_checksum(const PromptTemplate& tmpl);

using Bindings = std::map<std::string, std::string>;

struct RenderedPrompt {
  std::vector<ChatMessage> messages;
  TemplateName template_name = TemplateName::summarizer;
  Bindings bindings;

  /// All message contents joined, for digests and inspection.
  std::string text() const;
};

/// Bit-exact builtin template. Throws Error(unknown_template) for an unknown
/// name string.
PromptTemplate load_builtin(TemplateName name);
PromptTemplate load_builtin(std::string_view name);

/// Renders to one system and one user message. Every "[Examples]" line in the
/// user text receives `examples` joined by blank lines, or disappears when the
/// list is empty.
RenderedPrompt render(const PromptTemplate& tmpl, const Bindings& bindings,
                      const std::vector<std::string>& examples = {});

/// Like render, but slot i (in order of appearance) receives example_slots[i].
RenderedPrompt render_slots(const PromptTemplate& tmpl, const Bindings& bindings,
                            const std::vector<std::vector<std::string>>& example_slots);

/// Builtins, optionally overridden per template by "<dir>/<name>.txt" files.
class PromptCatalog {
 public:
  PromptCatalog();
  explicit PromptCatalog(const std::filesystem::path& override_dir);

  const PromptTemplate& get(TemplateName name) const;

  std::map<std::string, std::string> checksums() const;

 private:
  std::map<TemplateName, PromptTemplate> templates_;
};

/// Template file format: a "=== system ===" line, the system text, a
/// "=== user ===" line, the user text.
std::string serialize_template_file(const PromptTemplate& tmpl);
PromptTemplate parse_template_file(TemplateName name, std::string_view contents);

void export_builtins(const std::filesystem::path& dir);

}  // namespace docsimp
