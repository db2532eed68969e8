#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ideaspace::corpus {

// One design idea in Action-Object-Context form.
struct Idea {
  std::string id;
  std::string title;
  std::string action;
  std::string object;
  std::string context;

  bool operator==(const Idea&) const = default;
};

// All ideas generated for one problem statement.
struct IdeaSet {
  std::string set_id;
  std::string problem_statement;
  std::vector<Idea> ideas;

  bool operator==(const IdeaSet&) const = default;
};

enum class Format { kJson, kCsv };

// Parses and validates a corpus. JSON follows
//   {"sets":[{"set_id","problem_statement","ideas":[{id,title,action,object,context}]}]}
// CSV needs the header columns id,title,action,object,context in any order;
// optional set_id and problem_statement columns group rows into sets, and
// rows without a set_id land in `default_set_id`.
//
// Throws ParseError (with line/column, and record index for CSV) on bad
// syntax and ValidationError on schema or invariant violations. Text fields
// are trimmed; idea order is preserved.
std::vector<IdeaSet> parse_corpus(std::string_view raw, Format format,
                                  std::string_view default_set_id = "set-1");

// Reads `path`, choosing the format from the extension (.csv or JSON).
std::vector<IdeaSet> load_corpus(const std::string& path);

// Canonical JSON serialization (the inverse of parse_corpus for kJson).
std::string serialize_corpus(const std::vector<IdeaSet>& sets);

// Throws ValidationError if `set` violates the Idea/IdeaSet invariants.
void validate(const IdeaSet& set);

// A text template with <field> placeholders over title/action/object/context.
// Anything outside placeholders is copied verbatim.
class TextTemplate {
 public:
  static constexpr std::string_view kDefault = "<title>. <action>. <object>. <context>.";

  TextTemplate() : TextTemplate(kDefault) {}
  // Throws TemplateError for unknown fields or an unterminated placeholder.
  explicit TextTemplate(std::string_view source);

  const std::string& source() const noexcept { return source_; }
  std::string render(const Idea& idea) const;

 private:
  enum class Field { kTitle, kAction, kObject, kContext };
  struct Piece {
    bool is_field;
    Field field;
    std::string literal;
  };

  std::string source_;
  std::vector<Piece> pieces_;
};

std::string render_idea_text(const Idea& idea, const TextTemplate& tmpl = TextTemplate());

// Deterministic synthetic AOC corpus for offline experiments: each set draws
// its ideas from `themes_per_set` vocabularies so that shared-token
// embeddings form visible clusters. Problem statements reuse six real
// ideation prompts (cycled when n_sets > 6).
std::vector<IdeaSet> synthesize_corpus(int n_sets, int ideas_per_set, std::uint64_t seed,
                                       int themes_per_set = 5);

}  // namespace ideaspace::corpus
