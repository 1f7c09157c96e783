#include <algorithm>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "studyplan/rules.h"

namespace studyplan {

// ---------------------------------------------------------------------------
// Vocabulary

std::string_view to_string(AtomKind kind) {
  switch (kind) {
    case AtomKind::passed: return "passed";
    case AtomKind::failed: return "failed";
    case AtomKind::registered: return "registered";
    case AtomKind::deregistered: return "deregistered";
    case AtomKind::planned_take: return "planned_take";
  }
  return "planned_take";
}

std::optional<AtomKind> parse_atom_kind(std::string_view text) {
  for (auto k : {AtomKind::passed, AtomKind::failed, AtomKind::registered, AtomKind::deregistered,
                 AtomKind::planned_take}) {
    if (text == to_string(k)) return k;
  }
  return std::nullopt;
}

std::string_view to_string(Verb verb) {
  switch (verb) {
    case Verb::pass: return "pass";
    case Verb::fail: return "fail";
    case Verb::take: return "take";
    case Verb::register_: return "register";
  }
  return "take";
}

bool verb_matches(Verb verb, AtomKind kind) {
  switch (verb) {
    case Verb::pass: return kind == AtomKind::passed || kind == AtomKind::planned_take;
    case Verb::fail: return kind == AtomKind::failed;
    case Verb::take: return kind != AtomKind::deregistered;
    case Verb::register_: return true;
  }
  return false;
}

std::string EventPattern::to_string() const {
  return std::string(studyplan::to_string(verb)) + "(" + course_id + ")";
}

std::string_view to_string(Comparator cmp) {
  switch (cmp) {
    case Comparator::lt: return "<";
    case Comparator::le: return "<=";
    case Comparator::eq: return "=";
    case Comparator::ge: return ">=";
    case Comparator::gt: return ">";
  }
  return ">=";
}

bool compare(std::int64_t value, Comparator cmp, std::int64_t bound) {
  switch (cmp) {
    case Comparator::lt: return value < bound;
    case Comparator::le: return value <= bound;
    case Comparator::eq: return value == bound;
    case Comparator::ge: return value >= bound;
    case Comparator::gt: return value > bound;
  }
  return false;
}

std::string_view to_string(RuleCategory c) {
  switch (c) {
    case RuleCategory::invariant: return "invariant";
    case RuleCategory::variant_admin: return "variant_admin";
    case RuleCategory::variant_student: return "variant_student";
  }
  return "invariant";
}

int ResultRequirement::judged_at() const {
  return std::holds_alternative<Deadline>(at) ? std::get<Deadline>(at).sem : std::get<Window>(at).to;
}

bool RuleSet::declares(std::string_view result) const {
  return std::find(results.begin(), results.end(), result) != results.end();
}

std::vector<const Contribution*> RuleSet::contributions() const {
  std::vector<const Contribution*> out;
  for (const auto& r : rules) {
    if (auto c = std::get_if<Contribution>(&r.body)) out.push_back(c);
  }
  return out;
}

RulesParseError::RulesParseError(std::size_t line, std::size_t column, const std::string& message)
    : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
      line_(line),
      column_(column),
      message_(message) {}

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class Tok { word, punct, end };

struct Token {
  Tok kind = Tok::end;
  std::string text;
  std::size_t column = 0;
};

bool word_start(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

struct LexedLine {
  std::vector<Token> tokens;
  std::string comment;  // text after '#', trimmed
};

LexedLine lex_line(std::string_view line, std::size_t line_no) {
  LexedLine out;
  std::size_t i = 0;
  while (i < line.size()) {
    char c = line[i];
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    if (c == '#') {
      std::string_view rest = line.substr(i + 1);
      while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest.front()))) rest.remove_prefix(1);
      while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest.back()))) rest.remove_suffix(1);
      out.comment = std::string(rest);
      break;
    }
    std::size_t col = i + 1;
    if (word_start(c)) {
      std::size_t j = i + 1;
      while (j < line.size()) {
        char d = line[j];
        if (word_start(d)) {
          ++j;
        } else if (d == '.' && !(j + 1 < line.size() && line[j + 1] == '.')) {
          ++j;
        } else if (d == '-' && !(j + 1 < line.size() && line[j + 1] == '>')) {
          ++j;
        } else {
          break;
        }
      }
      out.tokens.push_back({Tok::word, std::string(line.substr(i, j - i)), col});
      i = j;
      continue;
    }
    auto two = line.substr(i, 2);
    if (two == "->" || two == "+=" || two == ".." || two == "<=" || two == ">=") {
      out.tokens.push_back({Tok::punct, std::string(two), col});
      i += 2;
      continue;
    }
    if (std::string_view("(){},:<>=").find(c) != std::string_view::npos) {
      out.tokens.push_back({Tok::punct, std::string(1, c), col});
      ++i;
      continue;
    }
    std::string shown = std::isprint(static_cast<unsigned char>(c)) ? std::string(1, c) : "\\x" + [&] {
      static const char* hex = "0123456789abcdef";
      unsigned char u = static_cast<unsigned char>(c);
      return std::string{hex[u >> 4], hex[u & 15]};
    }();
    throw RulesParseError(line_no, col, "unexpected character '" + shown + "'");
  }
  return out;
}

bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s.front())) || s.front() == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

bool is_course_id(std::string_view s) { return !s.empty() && word_start(s.front()); }

class LineParser {
 public:
  LineParser(const LexedLine& lexed, std::size_t line_no, std::size_t line_length)
      : tokens_(lexed.tokens), line_no_(line_no), eol_column_(line_length + 1) {}

  const Token& peek() const {
    static const Token end_token{Tok::end, "", 0};
    return pos_ < tokens_.size() ? tokens_[pos_] : end_token;
  }

  std::size_t column() const { return pos_ < tokens_.size() ? tokens_[pos_].column : eol_column_; }

  [[noreturn]] void fail(const std::string& message) const { throw RulesParseError(line_no_, column(), message); }

  std::string describe_next() const {
    return pos_ < tokens_.size() ? "'" + tokens_[pos_].text + "'" : "end of line";
  }

  const Token& take() {
    if (pos_ >= tokens_.size()) fail("unexpected end of line");
    return tokens_[pos_++];
  }

  bool at_end() const { return pos_ >= tokens_.size(); }

  void expect_punct(std::string_view p) {
    if (peek().kind != Tok::punct || peek().text != p) fail("expected '" + std::string(p) + "', found " + describe_next());
    ++pos_;
  }

  void expect_word(std::string_view w) {
    if (peek().kind != Tok::word || peek().text != w) fail("expected '" + std::string(w) + "', found " + describe_next());
    ++pos_;
  }

  bool accept_punct(std::string_view p) {
    if (peek().kind == Tok::punct && peek().text == p) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::string identifier(const char* what) {
    if (peek().kind != Tok::word || !is_identifier(peek().text)) {
      fail(std::string("expected ") + what + ", found " + describe_next());
    }
    return take().text;
  }

  std::string course() {
    if (peek().kind != Tok::word || !is_course_id(peek().text)) fail("expected course id, found " + describe_next());
    return take().text;
  }

  std::int64_t integer(const char* what) {
    const Token& tok = peek();
    if (tok.kind != Tok::word) fail(std::string("expected ") + what + ", found " + describe_next());
    std::int64_t value = 0;
    auto [p, ec] = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), value);
    if (ec != std::errc{} || p != tok.text.data() + tok.text.size()) {
      fail(std::string("type mismatch: ") + what + " must be a non-negative integer, found '" + tok.text + "'");
    }
    ++pos_;
    return value;
  }

  int semester(const char* what) {
    std::size_t col = column();
    std::int64_t v = integer(what);
    if (v < 1 || v > 10000) throw RulesParseError(line_no_, col, std::string(what) + " must be between 1 and 10000");
    return static_cast<int>(v);
  }

  EventPattern event() {
    const Token& tok = peek();
    EventPattern e;
    if (tok.kind == Tok::word && tok.text == "pass") {
      e.verb = Verb::pass;
    } else if (tok.kind == Tok::word && tok.text == "fail") {
      e.verb = Verb::fail;
    } else if (tok.kind == Tok::word && tok.text == "take") {
      e.verb = Verb::take;
    } else if (tok.kind == Tok::word && tok.text == "register") {
      e.verb = Verb::register_;
    } else {
      fail("expected pass, fail, take or register, found " + describe_next());
    }
    ++pos_;
    expect_punct("(");
    e.course_id = course();
    expect_punct(")");
    return e;
  }

  Comparator comparator() {
    static const std::map<std::string, Comparator> table{
        {"<", Comparator::lt}, {"<=", Comparator::le}, {"=", Comparator::eq}, {">=", Comparator::ge}, {">", Comparator::gt}};
    if (peek().kind == Tok::punct) {
      if (auto it = table.find(peek().text); it != table.end()) {
        ++pos_;
        return it->second;
      }
    }
    fail("expected comparator (<, <=, =, >=, >), found " + describe_next());
  }

  void expect_end() {
    if (!at_end()) fail("unexpected " + describe_next() + " after statement");
  }

 private:
  const std::vector<Token>& tokens_;
  std::size_t pos_ = 0;
  std::size_t line_no_;
  std::size_t eol_column_;
};

struct ResultUse {
  std::string name;
  std::size_t line;
  std::size_t column;
};

ResultRequirement parse_result_requirement(LineParser& p, std::vector<ResultUse>& uses, std::size_t line_no) {
  ResultRequirement req;
  p.expect_word("sum");
  p.expect_punct("(");
  std::size_t col = p.column();
  req.result = p.identifier("result name");
  uses.push_back({req.result, line_no, col});
  if (p.accept_punct(",")) {
    if (p.accept_punct("{")) {
      std::vector<std::string> courses{p.course()};
      while (p.accept_punct(",")) courses.push_back(p.course());
      p.expect_punct("}");
      std::sort(courses.begin(), courses.end());
      courses.erase(std::unique(courses.begin(), courses.end()), courses.end());
      req.filter = std::move(courses);
    } else if (p.peek().kind == Tok::word && p.peek().text == "tag") {
      p.take();
      p.expect_punct(":");
      req.filter = TagFilter{p.identifier("tag name")};
    } else {
      p.fail("expected course set '{...}' or 'tag:NAME', found " + p.describe_next());
    }
  }
  p.expect_punct(")");
  req.cmp = p.comparator();
  req.bound = p.integer("bound");
  if (p.peek().kind == Tok::word && p.peek().text == "by") {
    p.take();
    p.expect_word("sem");
    req.at = Deadline{p.semester("deadline")};
  } else if (p.peek().kind == Tok::word && p.peek().text == "in") {
    p.take();
    p.expect_word("sems");
    std::size_t from_col = p.column();
    Window w;
    w.from = p.semester("window start");
    p.expect_punct("..");
    w.to = p.semester("window end");
    if (w.from > w.to) throw RulesParseError(line_no, from_col, "window start exceeds window end");
    req.at = w;
  } else {
    p.fail("expected 'by sem' or 'in sems', found " + p.describe_next());
  }
  return req;
}

PrecedenceRequirement parse_precedence(LineParser& p, std::size_t line_no) {
  std::size_t col = p.column();
  PrecedenceRequirement req;
  req.before = p.event();
  p.expect_word("before");
  req.after = p.event();
  if (req.before == req.after) throw RulesParseError(line_no, col, "precedence relates an event to itself");
  return req;
}

}  // namespace

RuleSet parse_rules(std::string_view text) {
  RuleSet rs;
  RuleCategory category = RuleCategory::invariant;
  std::map<std::string, std::size_t> declared_at;
  std::vector<ResultUse> uses;

  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    start = end + 1;

    LexedLine lexed = lex_line(line, line_no);
    if (lexed.tokens.empty()) {
      if (end == text.size()) break;
      continue;
    }
    LineParser p(lexed, line_no, line.size());
    const Token& head = p.peek();
    if (head.kind != Tok::word) p.fail("expected statement keyword, found " + p.describe_next());
    std::string keyword = head.text;
    std::size_t keyword_col = head.column;
    p.take();

    Rule rule;
    rule.category = category;
    bool is_rule = true;

    if (keyword == "result") {
      std::size_t col = p.column();
      std::string name = p.identifier("result name");
      p.expect_end();
      if (declared_at.count(name)) {
        throw RulesParseError(line_no, col,
                              "duplicate result declaration '" + name + "' (first on line " +
                                  std::to_string(declared_at[name]) + ")");
      }
      declared_at[name] = line_no;
      rs.results.push_back(name);
      is_rule = false;
    } else if (keyword == "category") {
      std::string which = p.at_end() ? "" : p.peek().text;
      if (which == "invariant") {
        category = RuleCategory::invariant;
      } else if (which == "variant_admin") {
        category = RuleCategory::variant_admin;
      } else if (which == "variant_student") {
        category = RuleCategory::variant_student;
      } else {
        p.fail("unknown category keyword " + p.describe_next());
      }
      p.take();
      p.expect_end();
      is_rule = false;
    } else if (keyword == "contributes") {
      Contribution c;
      c.trigger = p.event();
      p.expect_punct("->");
      std::size_t col = p.column();
      c.result = p.identifier("result name");
      uses.push_back({c.result, line_no, col});
      p.expect_punct("+=");
      c.delta = p.integer("contribution");
      p.expect_end();
      rule.body = std::move(c);
    } else if (keyword == "require" || keyword == "default") {
      if (keyword == "default") {
        rule.strength = Strength::recommendation;
        if (lexed.comment == "mined") rule.provenance = Provenance::mined;
      }
      if (p.peek().kind == Tok::word && p.peek().text == "sum") {
        rule.body = parse_result_requirement(p, uses, line_no);
      } else {
        rule.body = parse_precedence(p, line_no);
      }
      p.expect_end();
    } else if (keyword == "offered") {
      AvailabilityRequirement a;
      a.course_id = p.course();
      p.expect_word("in");
      std::string terms = p.at_end() ? "" : p.peek().text;
      auto parsed = parse_offered(terms);
      if (!parsed) p.fail("expected WS, SS or BOTH, found " + p.describe_next());
      p.take();
      a.offered = *parsed;
      p.expect_end();
      rule.body = std::move(a);
    } else {
      throw RulesParseError(line_no, keyword_col, "unknown statement '" + keyword + "'");
    }

    if (is_rule) {
      rule.id = static_cast<int>(rs.rules.size()) + 1;
      rs.rules.push_back(std::move(rule));
    }
    if (end == text.size()) break;
  }

  for (const auto& use : uses) {
    if (!declared_at.count(use.name)) {
      throw RulesParseError(use.line, use.column, "undeclared result '" + use.name + "'");
    }
  }
  return rs;
}

RuleSet load_rules_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open rules file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  RuleSet rs;
  try {
    rs = parse_rules(buffer.str());
  } catch (const RulesParseError& e) {
    throw RulesParseError(e.line(), e.column(), path + ": " + e.message());
  }
  std::string stem = std::filesystem::path(path).stem().string();
  auto at = stem.find('@');
  if (at == std::string::npos || at == 0 || at + 1 == stem.size()) {
    throw Error(path + ": rules file names must look like <program>@<version>.rules");
  }
  rs.binding = {stem.substr(0, at), stem.substr(at + 1)};
  return rs;
}

std::vector<RuleSet> load_rules_dir(const std::string& dir) {
  std::vector<std::string> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".rules") files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());
  std::vector<RuleSet> out;
  for (const auto& f : files) out.push_back(load_rules_file(f));
  return out;
}

std::vector<std::string> audit_rules(const RuleSet& rs, const Catalog& catalog) {
  std::set<std::string> missing;
  auto check = [&](const std::string& course) {
    if (!catalog.count(course)) missing.insert(course);
  };
  for (const auto& rule : rs.rules) {
    std::visit(
        [&](const auto& body) {
          using T = std::decay_t<decltype(body)>;
          if constexpr (std::is_same_v<T, Contribution>) {
            check(body.trigger.course_id);
          } else if constexpr (std::is_same_v<T, PrecedenceRequirement>) {
            check(body.before.course_id);
            check(body.after.course_id);
          } else if constexpr (std::is_same_v<T, AvailabilityRequirement>) {
            check(body.course_id);
          } else {
            if (auto set = std::get_if<std::vector<std::string>>(&body.filter)) {
              for (const auto& c : *set) check(c);
            }
          }
        },
        rule.body);
  }
  std::vector<std::string> warnings;
  for (const auto& c : missing) warnings.push_back("rules reference course '" + c + "' which is not in the catalog");
  return warnings;
}

}  // namespace studyplan
