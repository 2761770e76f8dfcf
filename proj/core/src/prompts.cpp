#include "docsimp/prompts.hpp"

#include <fstream>
#include <sstream>

#include "docsimp/digest.hpp"
#include "docsimp/error.hpp"

namespace docsimp {

namespace {

// Baseline and summary prompts are single instruction boxes; they travel in
// the user message behind a neutral system line.
constexpr std::string_view kNeutralSystem = "You are a helpful assistant.";

struct BuiltinText {
  TemplateName name;
  std::string_view system;
  std::string_view user;
};

// Stored top-to-bottom as the figures read, one figure line per text line.
constexpr BuiltinText kBuiltins[] = {
    {TemplateName::summarizer, kNeutralSystem,
     "Please generate a summary of this document using the shortest possible language, "
     "retaining only the most important information.\n"
     "Source document: [SOURCE_DOCUMENT]\n"
     "Summary:"},

    {TemplateName::paragraph_simplifier,
     "You are a text editor tasked to simplify a document. You goal is to simplify paragraphs "
     "under the guidance of the summary. Here are some operations that may be used:\n"
     "1. Delete irrelevant sentences based on the summary document and context.\n"
     "2. Merge complex and redundant sentences to improve readability.\n"
     "3. Split complex sentences into simpler ones.\n"
     "4. Rephrase sentences with complex words or phrases.\n"
     "5. Retain important and already simplified sentences.\n"
     "6. Replace difficult expressions with simpler ones.",
     "[Examples]\n"
     "Summary: [SUMMARY]\n"
     "Paragraph to be simplified: [PARAGRAPH]\n"
     "Simplified paragraph:"},

    {TemplateName::discourse,
     "You are a professional manuscript editor and reviewer. The task is to organize and divide "
     "an article into multiple distinct topics. Each paragraph in the article is numbered.\n"
     "1. The goal is to maintain a consistent central theme for each topic.\n"
     "2. Subheadings need to be generated for each topic.\n"
     "3. Irrelevant paragraphs can be deleted.\n"
     "The output format must be a subheading followed by paragraph numbers, where these "
     "paragraph numbers represent the same topic.",
     "[Examples]\n"
     "Source document:\n"
     "[NUMBERED_DOCUMENT]\n"
     "The organized content:"},

    {TemplateName::discourse_single_paragraph,
     "You are a professional manuscript editor and reviewer. The task is to organize and divide "
     "a paragraph into multiple distinct topics. Each sentence in the paragraph is numbered.\n"
     "1. The goal is to maintain a consistent central theme for each topic.\n"
     "2. Subheadings need to be generated for each topic.\n"
     "3. Irrelevant sentences can be deleted.\n"
     "The output format must be a subheading followed by sentence numbers, where these "
     "sentence numbers represent the same topic.",
     "[Examples]\n"
     "Source paragraph:\n"
     "[NUMBERED_PARAGRAPH]\n"
     "The organized content:"},

    {TemplateName::topic,
     "You are a professional manuscript editor and reviser. The task is to simplify the given "
     "paragraph under the guidance of the subheading associated with the topic of the paragraph "
     "to enhance accessibility and readability.",
     "When it comes to the meaning and structure of the entire paragraph, you need to follow "
     "these tips:\n"
     "1. Identify key points and simplify the structure.\n"
     "2. Offer extra context for unfamiliar concepts.\n"
     "3. Maintain logical flow and consider paragraph division.\n"
     "[Examples]\n"
     "When it comes to the structure between sentences and within individual sentences, you "
     "need to follow these tips:\n"
     "1. Combine simple sentences.\n"
     "2. Divide complex sentences into simpler ones.\n"
     "3. Remove irrelevant sentences.\n"
     "4. Rearrange sentence order for better flow.\n"
     "5. Utilize basic subject-verb-object sentence structure.\n"
     "[Examples]\n"
     "Subheading of current topic:[SUBHEADING]\n"
     "Paragraph to be simplified: [PARAGRAPH]\n"
     "The simplified paragraph:"},

    {TemplateName::lexical,
     "You are a query engine equipped with a wide range of simpler alternatives for complex "
     "expressions. The task is to identify complex and uncommon vocabulary, phrases, idioms, etc. "
     "in a given sentence. And then provide simplified alternatives for these complex elements.\n"
     "1. Incorporate the replacements into the sentence and ensure that the sentences remain "
     "smooth and coherent.\n"
     "2. Explain an unfamiliar idea using more familiar words and examples that people know.\n"
     "3. The sentence structure doesn't need to be considered, and the overall meaning should be "
     "maintained as much as possible after the replacements are made.",
     "[Examples]\n"
     "Sentence to be simplified:\n"
     "[SENTENCE]\n"
     "The simplified sentence:"},

    {TemplateName::cot_generator,
     "To transform a complex and difficult-to-understand sentence into a simple and "
     "easy-to-understand one requires a certain thought process. Now, please learn from some "
     "examples and provide the thought process for the given complex-simple sentence pairs.",
     "Complex sentence: A story of animals healing depression.\n"
     "Reasoning: The phrase ‘healing depression’ is a bit difficult to understand, "
     "depression, as mentioned here, can be described as a condition that brings about feelings "
     "of sadness, and animals can help in treating this condition.\n"
     "Simple: A story about animals that can help when someone feels sad.\n"
     "[COMPLEX_SIMPLE_PAIR]\n"
     "The reasoning of this pair:"},

    {TemplateName::judge,
     "You are a professional document review expert with a strong foundation in writing and "
     "extensive experience in reviewing. Please compare the following two documents and analyze "
     "which one is better simplified based on the factors of coherence, simplicity, and "
     "faithfulness.",
     "Document 1: [BASELINE_DOCUMENT]\n"
     "Document 2: [CANDIDATE_DOCUMENT]\n"
     "In your analysis, please consider how well each document maintains:\n"
     "- Coherence: The logical flow and organization, ensuring smooth transitions between "
     "sentences and paragraphs.\n"
     "- Simplicity: The level of complexity and difficulty, aiming to make the content more "
     "accessible through plain language, shorter sentences, and simpler vocabulary.\n"
     "- Faithfulness: How well each document preserves the core meaning, key information, and "
     "intended message of the original document without distorting or misrepresenting them.\n"
     "Please note that you must provide some thoughts and analysis on comparing the two "
     "documents, and in the last line, present the improved simplified document.\n"
     "Follow the output format: [Reasoning content: ... The better-simplified document: "
     "(Document 1 or Document 2)]"},

    {TemplateName::p1, kNeutralSystem,
     "You are a professional simplified text writer, I need you to simplify the language and "
     "structure of the raw text to make it more accessible to pupils.\n"
     "Replace complex words or phrases or technical terms with simpler, more familiar words or "
     "terms, use more and shorter clauses, and reorganize clauses to make them easier to read.\n"
     "Raw text:\n"
     "[RAW_TEXT]\n"
     "Simplified text:"},

    {TemplateName::p2, kNeutralSystem,
     "As a text simplification writer, your task is to simplify the given text content: restate "
     "the original text in simpler and easier-to-understand language without changing its "
     "meaning as much as possible.\n"
     "You can change paragraph or sentence structure, remove some redundant information, and "
     "replace complex and uncommon expressions with simple and common ones.\n"
     "It should be noted that the task of text simplification is completely different from the "
     "task of text summarization, so you need to provide a simplified parallel version based on "
     "the original text, rather than just providing a brief summary.\n"
     "Raw text:\n"
     "[RAW_TEXT]\n"
     "Simplified text:"},

    {TemplateName::ic, kNeutralSystem,
     "[DOCUMENT_EXAMPLE]\n"
     "Now please study the example above and simplify the document below. Please note that "
     "document simplification is not a document summary. You cannot shorten the original text "
     "to a very small length.\n"
     "The operations you need mainly include paragraph order reconstruction, redundant "
     "information removal, sentence structure simplification, and replacing complex words or "
     "phrases with simple expressions. In addition, simplified documents require subheadings "
     "starting with ## to improve readability.\n"
     "Raw text:\n"
     "[RAW_TEXT]\n"
     "Simplified text:"},
};

constexpr std::string_view kSystemMarker = "=== system ===";
constexpr std::string_view kUserMarker = "=== user ===";

bool placeholder_char(char c, bool first) {
  if (c >= 'A' && c <= 'Z') return true;
  return !first && ((c >= '0' && c <= '9') || c == '_');
}

// Length of a [UPPER_SNAKE] placeholder starting at text[pos], or 0.
std::size_t placeholder_at(std::string_view text, std::size_t pos) {
  if (text[pos] != '[') return 0;
  std::size_t i = pos + 1;
  while (i < text.size() && placeholder_char(text[i], i == pos + 1)) ++i;
  if (i == pos + 1 || i >= text.size() || text[i] != ']') return 0;
  return i - pos + 1;
}

std::string substitute(std::string_view text, const Bindings& bindings) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (auto n = placeholder_at(text, i)) {
      std::string name(text.substr(i + 1, n - 2));
      out += bindings.at(name);
      i += n;
    } else {
      out.push_back(text[i++]);
    }
  }
  return out;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (true) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) {
      lines.push_back(text.substr(pos));
      break;
    }
    lines.push_back(text.substr(pos, eol - pos));
    pos = eol + 1;
  }
  return lines;
}

std::string join_blocks(const std::vector<std::string>& blocks) {
  std::string out;
  for (const auto& b : blocks) {
    if (!out.empty()) out += "\n\n";
    out += b;
  }
  return out;
}

}  // namespace

std::string_view to_string(TemplateName name) noexcept {
  switch (name) {
    case TemplateName::summarizer: return "summarizer";
    case TemplateName::paragraph_simplifier: return "paragraph_simplifier";
    case TemplateName::discourse: return "discourse";
    case TemplateName::discourse_single_paragraph: return "discourse_single_paragraph";
    case TemplateName::topic: return "topic";
    case TemplateName::lexical: return "lexical";
    case TemplateName::cot_generator: return "cot_generator";
    case TemplateName::judge: return "judge";
    case TemplateName::p1: return "p1";
    case TemplateName::p2: return "p2";
    case TemplateName::ic: return "ic";
  }
  return "unknown";
}

std::optional<TemplateName> template_from_string(std::string_view name) {
  for (auto t : kAllTemplates)
    if (to_string(t) == name) return t;
  return std::nullopt;
}

int PromptTemplate::example_slots() const {
  int n = 0;
  for (auto line : split_lines(user_text))
    if (line == kExamplesSlot) ++n;
  return n;
}

std::set<std::string> find_placeholders(std::string_view text) {
  std::set<std::string> names;
  for (std::size_t i = 0; i < text.size(); ++i)
    if (auto n = placeholder_at(text, i)) names.emplace(text.substr(i + 1, n - 2));
  return names;
}

PromptTemplate make_template(TemplateName name, std::string system_text, std::string user_text) {
  PromptTemplate t;
  t.name = name;
  t.system_text = std::move(system_text);
  t.user_text = std::move(user_text);
  t.required_placeholders = find_placeholders(t.system_text);
  t.required_placeholders.merge(find_placeholders(t.user_text));
  return t;
}

std::string template_checksum(const PromptTemplate& tmpl) {
  std::string data(to_string(tmpl.name));
  data += '\0';
  data += tmpl.system_text;
  data += '\0';
  data += tmpl.user_text;
  return sha256_hex(data);
}

std::string RenderedPrompt::text() const {
  std::string out;
  for (const auto& m : messages) {
    if (!out.empty()) out += "\n\n";
    out += m.content;
  }
  return out;
}

PromptTemplate load_builtin(TemplateName name) {
  for (const auto& b : kBuiltins)
    if (b.name == name) return make_template(name, std::string(b.system), std::string(b.user));
  throw Error(ErrorCode::unknown_template, "no builtin template " + std::string(to_string(name)));
}

PromptTemplate load_builtin(std::string_view name) {
  auto t = template_from_string(name);
  if (!t) throw Error(ErrorCode::unknown_template, "unknown template '" + std::string(name) + "'");
  return load_builtin(*t);
}

RenderedPrompt render_slots(const PromptTemplate& tmpl, const Bindings& bindings,
                            const std::vector<std::vector<std::string>>& example_slots) {
  for (const auto& name : tmpl.required_placeholders)
    if (!bindings.contains(name))
      throw Error(ErrorCode::missing_binding, "missing binding for placeholder [" + name + "]");
  for (const auto& [name, _] : bindings)
    if (!tmpl.required_placeholders.contains(name))
      throw Error(ErrorCode::extra_binding,
                  "binding '" + name + "' is not a placeholder of template " +
                      std::string(to_string(tmpl.name)));

  std::string user;
  std::size_t slot = 0;
  bool first = true;
  for (auto line : split_lines(tmpl.user_text)) {
    std::string rendered;
    if (line == kExamplesSlot) {
      const auto* blocks = slot < example_slots.size() ? &example_slots[slot] : nullptr;
      ++slot;
      if (!blocks || blocks->empty()) continue;
      rendered = join_blocks(*blocks);
    } else {
      rendered = substitute(line, bindings);
    }
    if (!first) user.push_back('\n');
    user += rendered;
    first = false;
  }

  RenderedPrompt out;
  out.template_name = tmpl.name;
  out.bindings = bindings;
  if (!tmpl.system_text.empty())
    out.messages.push_back({Role::system, substitute(tmpl.system_text, bindings)});
  out.messages.push_back({Role::user, std::move(user)});
  return out;
}

RenderedPrompt render(const PromptTemplate& tmpl, const Bindings& bindings,
                      const std::vector<std::string>& examples) {
  std::vector<std::vector<std::string>> slots(static_cast<std::size_t>(tmpl.example_slots()),
                                              examples);
  return render_slots(tmpl, bindings, slots);
}

std::string serialize_template_file(const PromptTemplate& tmpl) {
  std::string out(kSystemMarker);
  out += '\n';
  out += tmpl.system_text;
  out += '\n';
  out += kUserMarker;
  out += '\n';
  out += tmpl.user_text;
  out += '\n';
  return out;
}

PromptTemplate parse_template_file(TemplateName name, std::string_view contents) {
  auto lines = split_lines(contents);
  // a trailing newline yields one empty final line
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty() || lines.front() != kSystemMarker)
    throw Error(ErrorCode::template_format,
                "template file must start with '" + std::string(kSystemMarker) + "'");
  std::string system, user;
  std::string* target = &system;
  bool first = true;
  bool seen_user = false;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i] == kUserMarker && !seen_user) {
      target = &user;
      first = true;
      seen_user = true;
      continue;
    }
    if (!first) target->push_back('\n');
    target->append(lines[i]);
    first = false;
  }
  if (!seen_user)
    throw Error(ErrorCode::template_format,
                "template file lacks '" + std::string(kUserMarker) + "' section");
  return make_template(name, std::move(system), std::move(user));
}

PromptCatalog::PromptCatalog() {
  for (auto name : kAllTemplates) templates_.emplace(name, load_builtin(name));
}

PromptCatalog::PromptCatalog(const std::filesystem::path& override_dir) : PromptCatalog() {
  for (auto name : kAllTemplates) {
    auto file = override_dir / (std::string(to_string(name)) + ".txt");
    if (!std::filesystem::exists(file)) continue;
    std::ifstream in(file, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    auto tmpl = parse_template_file(name, ss.str());
    if (tmpl.required_placeholders != templates_.at(name).required_placeholders)
      throw Error(ErrorCode::template_format,
                  file.string() + ": placeholders differ from the builtin template");
    templates_[name] = std::move(tmpl);
  }
}

const PromptTemplate& PromptCatalog::get(TemplateName name) const { return templates_.at(name); }

std::map<std::string, std::string> PromptCatalog::checksums() const {
  std::map<std::string, std::string> out;
  for (const auto& [name, tmpl] : templates_)
    out.emplace(std::string(to_string(name)), template_checksum(tmpl));
  return out;
}

void export_builtins(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (auto name : kAllTemplates) {
    std::ofstream out(dir / (std::string(to_string(name)) + ".txt"), std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot write templates to " + dir.string());
    out << serialize_template_file(load_builtin(name));
  }
}

}  // namespace docsimp
