#include <cctype>

#include "emsim/genai.hpp"
#include "genai/assets.hpp"

namespace emsim::genai {

namespace {

struct Piece {
  enum class Kind { Text, Placeholder } kind;
  std::string text;  // literal text, or the placeholder name
};

bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::vector<Piece> split(std::string_view body) {
  std::vector<Piece> out;
  std::string lit;
  for (std::size_t i = 0; i < body.size(); ++i) {
    const char c = body[i];
    if ((c == '{' || c == '}') && i + 1 < body.size() && body[i + 1] == c) {
      lit += c;
      ++i;
      continue;
    }
    if (c == '{') {
      std::size_t j = i + 1;
      while (j < body.size() && ident_char(body[j])) ++j;
      if (j > i + 1 && j < body.size() && body[j] == '}') {
        if (!lit.empty()) out.push_back({Piece::Kind::Text, std::move(lit)});
        lit.clear();
        out.push_back({Piece::Kind::Placeholder, std::string(body.substr(i + 1, j - i - 1))});
        i = j;
        continue;
      }
    }
    if (c == '{' || c == '}')
      throw MissingPlaceholder("lone '" + std::string(1, c) + "' at offset " + std::to_string(i) +
                               "; literal braces must be doubled");
    lit += c;
  }
  if (!lit.empty()) out.push_back({Piece::Kind::Text, std::move(lit)});
  return out;
}

bool blank(std::string_view s) {
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  return true;
}

}  // namespace

std::string_view to_string(TemplateId id) {
  switch (id) {
    case TemplateId::LayoutGen: return "layout_gen";
    case TemplateId::DslWithExamples: return "dsl_with_examples";
    case TemplateId::DslWithoutExamples: return "dsl_without_examples";
    case TemplateId::Summary: return "summary";
  }
  return "?";
}

std::optional<TemplateId> template_from_string(std::string_view s) {
  for (auto id : {TemplateId::LayoutGen, TemplateId::DslWithExamples, TemplateId::DslWithoutExamples,
                  TemplateId::Summary})
    if (to_string(id) == s) return id;
  return std::nullopt;
}

void check_template(const PromptTemplate& t) {
  int hits = 0;
  for (const auto& p : split(t.body))
    if (p.kind == Piece::Kind::Placeholder) {
      if (p.text != t.placeholder)
        throw MissingPlaceholder("template " + std::string(to_string(t.id)) + " has unexpected placeholder {" +
                                 p.text + "}");
      ++hits;
    }
  if (hits != 1)
    throw MissingPlaceholder("template " + std::string(to_string(t.id)) + " must contain {" + t.placeholder +
                             "} exactly once, found " + std::to_string(hits));
}

const PromptTemplate& builtin_template(TemplateId id) {
  static const std::vector<PromptTemplate> all = [] {
    std::vector<PromptTemplate> v{
        {TemplateId::LayoutGen, assets::layout_gen, "user_input"},
        {TemplateId::DslWithExamples, assets::dsl_with_examples, "user_input"},
        {TemplateId::DslWithoutExamples, assets::dsl_without_examples, "user_input"},
        {TemplateId::Summary, assets::summary, "stage_output"},
    };
    for (const auto& t : v) check_template(t);
    return v;
  }();
  return all[static_cast<std::size_t>(id)];
}

std::string render_prompt(const PromptTemplate& t, std::string_view user_input,
                          const std::map<std::string, std::string>& context) {
  if (blank(user_input)) throw BlankPrompt("empty prompt");
  std::string out;
  for (const auto& p : split(t.body)) {
    if (p.kind == Piece::Kind::Text) {
      out += p.text;
    } else if (p.text == t.placeholder) {
      out += user_input;
    } else if (auto it = context.find(p.text); it != context.end()) {
      out += it->second;
    } else {
      throw MissingPlaceholder("no value for {" + p.text + "}");
    }
  }
  return out;
}

}  // namespace emsim::genai
