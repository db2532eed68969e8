#include "ideaspace/corpus.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "ideaspace/detail/random.hpp"
#include "ideaspace/error.hpp"

namespace ideaspace::corpus {
namespace {

using nlohmann::json;

constexpr std::array<std::string_view, 5> kIdeaFields = {"id", "title", "action", "object",
                                                          "context"};

std::string trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n\v\f";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

std::string* field_slot(Idea& idea, std::string_view name) {
  if (name == "id") return &idea.id;
  if (name == "title") return &idea.title;
  if (name == "action") return &idea.action;
  if (name == "object") return &idea.object;
  if (name == "context") return &idea.context;
  return nullptr;
}

// Returns (line, column), both 1-based, of byte offset `pos`.
std::pair<int, int> line_col(std::string_view raw, std::size_t pos) {
  pos = std::min(pos, raw.size());
  int line = 1;
  int col = 1;
  for (std::size_t i = 0; i < pos; ++i) {
    if (raw[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

// Offset of the first invalid UTF-8 sequence, or npos.
std::size_t find_invalid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    if (c < 0x80) {
      len = 1;
    } else if ((c >> 5) == 0x6) {
      len = 2;
    } else if ((c >> 4) == 0xE) {
      len = 3;
    } else if ((c >> 3) == 0x1E) {
      len = 4;
    } else {
      return i;
    }
    if (i + len > s.size()) return i;
    for (std::size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(s[i + k]) >> 6) != 0x2) return i;
    }
    i += len;
  }
  return std::string_view::npos;
}

std::string describe_idea(const Idea& idea, std::size_t index) {
  if (!idea.id.empty()) return "idea '" + idea.id + "'";
  return "idea #" + std::to_string(index);
}

const json& require_member(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ValidationError(where + ": missing field '" + key + "'");
  }
  return *it;
}

std::string require_string(const json& obj, const char* key, const std::string& where) {
  const json& v = require_member(obj, key, where);
  if (!v.is_string()) {
    throw ValidationError(where + ": field '" + key + "' must be a string");
  }
  return trim(v.get_ref<const std::string&>());
}

std::vector<IdeaSet> parse_json(std::string_view raw) {
  json doc;
  try {
    doc = json::parse(raw);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(raw, e.byte == 0 ? 0 : e.byte - 1);
    throw ParseError("malformed corpus JSON at line " + std::to_string(line) + ", column " +
                         std::to_string(col) + ": " + e.what(),
                     line, col);
  }
  if (!doc.is_object()) throw ValidationError("corpus: top level must be an object");
  const json& sets = require_member(doc, "sets", "corpus");
  if (!sets.is_array()) throw ValidationError("corpus: field 'sets' must be an array");

  std::vector<IdeaSet> out;
  out.reserve(sets.size());
  for (std::size_t s = 0; s < sets.size(); ++s) {
    const json& js = sets[s];
    const std::string where = "set #" + std::to_string(s);
    if (!js.is_object()) throw ValidationError(where + ": must be an object");
    IdeaSet set;
    set.set_id = require_string(js, "set_id", where);
    const std::string set_where = set.set_id.empty() ? where : "set '" + set.set_id + "'";
    set.problem_statement = require_string(js, "problem_statement", set_where);
    const json& ideas = require_member(js, "ideas", set_where);
    if (!ideas.is_array()) throw ValidationError(set_where + ": field 'ideas' must be an array");
    for (std::size_t i = 0; i < ideas.size(); ++i) {
      const json& ji = ideas[i];
      if (!ji.is_object()) {
        throw ValidationError(set_where + ", idea #" + std::to_string(i) + ": must be an object");
      }
      Idea idea;
      // Read the id first so later diagnostics can name the idea.
      if (auto it = ji.find("id"); it != ji.end() && it->is_string()) {
        idea.id = trim(it->get_ref<const std::string&>());
      }
      for (std::string_view field : kIdeaFields) {
        const std::string key(field);
        *field_slot(idea, field) =
            require_string(ji, key.c_str(), set_where + ", " + describe_idea(idea, i));
      }
      set.ideas.push_back(std::move(idea));
    }
    out.push_back(std::move(set));
  }
  return out;
}

// RFC 4180 records. Each record remembers the line it started on.
struct CsvRecord {
  std::vector<std::string> fields;
  int line;
};

std::vector<CsvRecord> split_csv(std::string_view raw) {
  std::vector<CsvRecord> records;
  CsvRecord current{{}, 1};
  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;
  bool record_has_content = false;
  int line = 1;
  int col = 0;
  int quote_line = 0;
  int quote_col = 0;

  auto end_field = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
    field_was_quoted = false;
  };
  auto end_record = [&] {
    if (record_has_content || !current.fields.empty() || !field.empty()) {
      end_field();
      records.push_back(std::move(current));
    }
    current = CsvRecord{{}, line + 1};
    record_has_content = false;
  };

  for (std::size_t i = 0; i < raw.size(); ++i) {
    const char c = raw[i];
    ++col;
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < raw.size() && raw[i + 1] == '"') {
          field.push_back('"');
          ++i;
          ++col;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') {
          ++line;
          col = 0;
        }
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty() || field_was_quoted) {
          throw ParseError("CSV: unexpected quote at line " + std::to_string(line) + ", column " +
                               std::to_string(col),
                           line, col, static_cast<int>(records.size()));
        }
        in_quotes = true;
        field_was_quoted = true;
        record_has_content = true;
        quote_line = line;
        quote_col = col;
        break;
      case ',':
        end_field();
        record_has_content = true;
        break;
      case '\r':
        if (i + 1 < raw.size() && raw[i + 1] == '\n') break;
        field.push_back(c);
        break;
      case '\n':
        end_record();
        ++line;
        col = 0;
        break;
      default:
        if (field_was_quoted) {
          throw ParseError("CSV: text after closing quote at line " + std::to_string(line) +
                               ", column " + std::to_string(col),
                           line, col, static_cast<int>(records.size()));
        }
        field.push_back(c);
        record_has_content = true;
    }
  }
  if (in_quotes) {
    throw ParseError("CSV: unterminated quoted field starting at line " +
                         std::to_string(quote_line) + ", column " + std::to_string(quote_col),
                     quote_line, quote_col, static_cast<int>(records.size()) - 1);
  }
  end_record();
  return records;
}

std::vector<IdeaSet> parse_csv(std::string_view raw, std::string_view default_set_id) {
  if (const auto bad = find_invalid_utf8(raw); bad != std::string_view::npos) {
    const auto [line, col] = line_col(raw, bad);
    throw ParseError("CSV: invalid UTF-8 at line " + std::to_string(line) + ", column " +
                         std::to_string(col),
                     line, col);
  }
  // Tolerate a UTF-8 byte order mark.
  if (raw.substr(0, 3) == "\xEF\xBB\xBF") raw.remove_prefix(3);

  auto records = split_csv(raw);
  if (records.empty()) throw ValidationError("CSV: missing header row");

  std::map<std::string, std::size_t> column;
  const auto& header = records.front().fields;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string name = trim(header[i]);
    if (!column.emplace(name, i).second) {
      throw ValidationError("CSV: duplicate header column '" + name + "'");
    }
  }
  for (std::string_view field : kIdeaFields) {
    if (!column.count(std::string(field))) {
      throw ValidationError("CSV: header is missing column '" + std::string(field) + "'");
    }
  }
  const auto set_col = column.find("set_id");
  const auto ps_col = column.find("problem_statement");

  std::vector<IdeaSet> sets;
  std::map<std::string, std::size_t> set_index;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    const int record_no = static_cast<int>(r - 1);
    if (rec.fields.size() != header.size()) {
      throw ParseError("CSV: record " + std::to_string(record_no) + " at line " +
                           std::to_string(rec.line) + " has " + std::to_string(rec.fields.size()) +
                           " fields, expected " + std::to_string(header.size()),
                       rec.line, 1, record_no);
    }
    std::string set_id = set_col != column.end() ? trim(rec.fields[set_col->second]) : "";
    if (set_id.empty()) set_id = std::string(default_set_id);
    auto [it, inserted] = set_index.emplace(set_id, sets.size());
    if (inserted) sets.push_back(IdeaSet{set_id, "", {}});
    IdeaSet& set = sets[it->second];
    if (ps_col != column.end() && set.problem_statement.empty()) {
      set.problem_statement = trim(rec.fields[ps_col->second]);
    }
    Idea idea;
    for (std::string_view field : kIdeaFields) {
      *field_slot(idea, field) = trim(rec.fields[column.at(std::string(field))]);
    }
    set.ideas.push_back(std::move(idea));
  }
  if (sets.empty()) throw ValidationError("CSV: no idea records");
  return sets;
}

}  // namespace

void validate(const IdeaSet& set) {
  if (set.set_id.empty()) throw ValidationError("idea set has an empty set_id");
  const std::string where = "set '" + set.set_id + "'";
  if (set.ideas.empty()) throw ValidationError(where + ": ideas list is empty");
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < set.ideas.size(); ++i) {
    const Idea& idea = set.ideas[i];
    for (std::string_view field : kIdeaFields) {
      Idea copy = idea;
      if (trim(*field_slot(copy, field)).empty()) {
        throw ValidationError(where + ", " + describe_idea(idea, i) + ": field '" +
                              std::string(field) + "' is empty");
      }
    }
    if (!seen.insert(idea.id).second) {
      throw ValidationError(where + ": duplicate idea id '" + idea.id + "'");
    }
  }
}

std::vector<IdeaSet> parse_corpus(std::string_view raw, Format format,
                                  std::string_view default_set_id) {
  auto sets = format == Format::kJson ? parse_json(raw) : parse_csv(raw, default_set_id);
  std::unordered_set<std::string> set_ids;
  for (const auto& set : sets) {
    validate(set);
    if (!set_ids.insert(set.set_id).second) {
      throw ValidationError("duplicate set_id '" + set.set_id + "'");
    }
  }
  return sets;
}

std::vector<IdeaSet> load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const bool is_csv = path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
  std::string stem = path.substr(path.find_last_of('/') + 1);
  stem = stem.substr(0, stem.find('.'));
  return parse_corpus(buf.str(), is_csv ? Format::kCsv : Format::kJson,
                      stem.empty() ? "set-1" : stem);
}

std::string serialize_corpus(const std::vector<IdeaSet>& sets) {
  json doc;
  json& jsets = doc["sets"] = json::array();
  for (const auto& set : sets) {
    json ideas = json::array();
    for (const auto& idea : set.ideas) {
      ideas.push_back({{"id", idea.id},
                       {"title", idea.title},
                       {"action", idea.action},
                       {"object", idea.object},
                       {"context", idea.context}});
    }
    jsets.push_back(
        {{"set_id", set.set_id}, {"problem_statement", set.problem_statement}, {"ideas", ideas}});
  }
  return doc.dump(2) + "\n";
}

TextTemplate::TextTemplate(std::string_view source) : source_(source) {
  std::size_t pos = 0;
  std::string literal;
  while (pos < source.size()) {
    const auto open = source.find('<', pos);
    if (open == std::string_view::npos) {
      literal.append(source.substr(pos));
      break;
    }
    literal.append(source.substr(pos, open - pos));
    const auto close = source.find('>', open);
    if (close == std::string_view::npos) {
      throw TemplateError("template: unterminated placeholder at offset " + std::to_string(open));
    }
    const std::string_view name = source.substr(open + 1, close - open - 1);
    Field field;
    if (name == "title") {
      field = Field::kTitle;
    } else if (name == "action") {
      field = Field::kAction;
    } else if (name == "object") {
      field = Field::kObject;
    } else if (name == "context") {
      field = Field::kContext;
    } else {
      throw TemplateError("template: unknown field '" + std::string(name) + "'");
    }
    if (!literal.empty()) pieces_.push_back(Piece{false, Field::kTitle, std::move(literal)});
    literal.clear();
    pieces_.push_back(Piece{true, field, {}});
    pos = close + 1;
  }
  if (!literal.empty()) pieces_.push_back(Piece{false, Field::kTitle, std::move(literal)});
}

std::string TextTemplate::render(const Idea& idea) const {
  std::string out;
  for (const Piece& p : pieces_) {
    if (!p.is_field) {
      out += p.literal;
      continue;
    }
    switch (p.field) {
      case Field::kTitle: out += idea.title; break;
      case Field::kAction: out += idea.action; break;
      case Field::kObject: out += idea.object; break;
      case Field::kContext: out += idea.context; break;
    }
  }
  return out;
}

std::string render_idea_text(const Idea& idea, const TextTemplate& tmpl) {
  return tmpl.render(idea);
}

namespace {

constexpr std::array<std::string_view, 6> kProblemStatements = {
    "Product for segregation as a means for effective waste management",
    "Product for convenient umbrella drying and storage on travel",
    "Product for footwear disinfection and cleaning for improved hygiene and safety",
    "Product for enhancing household dish cleaning efficiency and sustainability",
    "Product for enhancing comfort and efficiency for prolonged standing in queues",
    "Product for bird-feeding for fostering mental well-being of elderly individuals at Home",
};

constexpr std::array<std::string_view, 16> kOnsets = {"b", "d",  "f",  "g",  "k",  "l",
                                                       "m", "n",  "p",  "r",  "s",  "t",
                                                       "v", "br", "st", "tr"};
constexpr std::array<std::string_view, 6> kVowels = {"a", "e", "i", "o", "u", "ai"};
constexpr std::array<std::string_view, 8> kCodas = {"", "n", "r", "l", "x", "m", "s", "th"};
constexpr std::array<std::string_view, 8> kVerbs = {"Sorts", "Guides", "Tracks", "Cleans",
                                                     "Stores", "Dries", "Supports", "Connects"};

std::string pseudo_word(detail::Rng& rng) {
  std::string w;
  const int syllables = 2 + static_cast<int>(rng.below(2));
  for (int i = 0; i < syllables; ++i) {
    w += kOnsets[rng.below(kOnsets.size())];
    w += kVowels[rng.below(kVowels.size())];
  }
  w += kCodas[rng.below(kCodas.size())];
  return w;
}

std::string capitalize(std::string w) {
  if (!w.empty() && w[0] >= 'a' && w[0] <= 'z') w[0] = static_cast<char>(w[0] - 'a' + 'A');
  return w;
}

}  // namespace

std::vector<IdeaSet> synthesize_corpus(int n_sets, int ideas_per_set, std::uint64_t seed,
                                       int themes_per_set) {
  if (n_sets < 1 || ideas_per_set < 1 || themes_per_set < 1) {
    throw ParameterError("synthesize_corpus: counts must be positive");
  }
  detail::Rng rng(seed);
  std::vector<IdeaSet> sets;
  for (int s = 0; s < n_sets; ++s) {
    IdeaSet set;
    set.set_id = "PS" + std::to_string(s + 1);
    set.problem_statement = std::string(kProblemStatements[static_cast<std::size_t>(s) %
                                                           kProblemStatements.size()]);
    std::vector<std::string> shared;
    for (int i = 0; i < 6; ++i) shared.push_back(pseudo_word(rng));
    std::vector<std::vector<std::string>> themes(static_cast<std::size_t>(themes_per_set));
    std::vector<double> weights;
    for (auto& vocab : themes) {
      for (int i = 0; i < 10; ++i) vocab.push_back(pseudo_word(rng));
      weights.push_back(0.5 + rng.uniform());
    }
    double total_weight = 0.0;
    for (double w : weights) total_weight += w;

    for (int i = 0; i < ideas_per_set; ++i) {
      // Roughly one idea in ten mixes vocabularies and tends to land as noise.
      const bool mixed = rng.uniform() < 0.1;
      double pick = rng.uniform() * total_weight;
      std::size_t theme = 0;
      while (theme + 1 < weights.size() && pick >= weights[theme]) pick -= weights[theme++];
      auto word = [&](double p_theme) -> const std::string& {
        if (rng.uniform() < p_theme) {
          const auto& vocab = mixed ? themes[rng.below(themes.size())] : themes[theme];
          return vocab[rng.below(vocab.size())];
        }
        return shared[rng.below(shared.size())];
      };
      Idea idea;
      idea.id = std::to_string(i + 1);
      idea.title = capitalize(word(0.9)) + " " + capitalize(word(0.9)) + " " +
                   capitalize(word(0.6));
      idea.action = std::string(kVerbs[rng.below(kVerbs.size())]) + " " + word(0.9);
      idea.object = capitalize(word(1.0));
      idea.context = capitalize(word(0.8));
      const int extra = 3 + static_cast<int>(rng.below(4));
      for (int k = 0; k < extra; ++k) idea.context += " " + word(0.8);
      set.ideas.push_back(std::move(idea));
    }
    sets.push_back(std::move(set));
  }
  return sets;
}

}  // namespace ideaspace::corpus
