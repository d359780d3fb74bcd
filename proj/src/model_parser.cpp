#include "steadyscan/model_parser.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace steadyscan {

// ---------------------------------------------------------------------------
// Tokenizer

std::vector<Token> tokenize(std::string_view text, int line, int column_offset) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto col = [&](std::size_t pos) { return static_cast<int>(pos) + 1 + column_offset; };
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    Token t;
    t.line = line;
    t.column = col(i);
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
      const std::string rest(text.substr(i));
      char* end = nullptr;
      t.number = std::strtod(rest.c_str(), &end);
      const auto len = static_cast<std::size_t>(end - rest.c_str());
      t.kind = TokenKind::Number;
      t.text = rest.substr(0, len);
      i += len;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) ++j;
      t.kind = TokenKind::Identifier;
      t.text = std::string(text.substr(i, j - i));
      i = j;
    } else {
      static const char* two[] = {"<=", ">=", "==", "!=", "->", "&&", "||"};
      t.kind = TokenKind::Symbol;
      bool matched = false;
      for (const char* s : two) {
        if (text.substr(i, 2) == s) {
          t.text = s;
          i += 2;
          matched = true;
          break;
        }
      }
      if (!matched) {
        if (std::string_view("+-*/^()[],:=<>!;").find(c) == std::string_view::npos)
          throw ParseError(std::string("unexpected character '") + c + "'", line, t.column);
        t.text = std::string(1, c);
        ++i;
      }
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.line = line;
  end.column = col(text.size());
  out.push_back(end);
  return out;
}

// ---------------------------------------------------------------------------
// Expressions

ExpressionParser::ExpressionParser(const std::vector<Token>& tokens, std::size_t pos, NameResolver resolve,
                                   double default_hill)
    : tokens_(tokens), pos_(pos), resolve_(std::move(resolve)), default_hill_(default_hill) {}

const Token& ExpressionParser::peek(std::size_t ahead) const {
  return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
}

const Token& ExpressionParser::next() {
  const Token& t = peek();
  if (pos_ < tokens_.size() - 1) ++pos_;
  return t;
}

bool ExpressionParser::accept(std::string_view symbol) {
  const Token& t = peek();
  if (t.kind == TokenKind::Symbol && t.text == symbol) {
    next();
    return true;
  }
  return false;
}

void ExpressionParser::expect(std::string_view symbol) {
  if (!accept(symbol)) fail("expected '" + std::string(symbol) + "'");
}

void ExpressionParser::fail(const std::string& what) const {
  const Token& t = peek();
  const std::string found = t.kind == TokenKind::End ? "end of line" : "'" + t.text + "'";
  throw ParseError(what + ", found " + found, t.line, t.column);
}

double ExpressionParser::parse_signed_number() {
  double sign = 1.0;
  if (accept("-")) sign = -1.0;
  else accept("+");
  const Token& t = peek();
  if (t.kind == TokenKind::Number) {
    next();
    return sign * t.number;
  }
  if (t.kind == TokenKind::Identifier && t.text == "inf") {
    next();
    return sign * std::numeric_limits<double>::infinity();
  }
  fail("expected a number");
}

Expr ExpressionParser::parse_expression() {
  Expr e = parse_term();
  for (;;) {
    if (accept("+")) {
      e = e + parse_term();
    } else if (accept("-")) {
      e = e - parse_term();
    } else {
      return e;
    }
  }
}

Expr ExpressionParser::parse_term() {
  Expr e = parse_unary();
  for (;;) {
    if (accept("*")) {
      e = e * parse_unary();
    } else if (accept("/")) {
      e = e / parse_unary();
    } else {
      return e;
    }
  }
}

Expr ExpressionParser::parse_unary() {
  if (accept("-")) {
    Expr a = parse_unary();
    if (a.is_constant()) return Expr::constant(-a.value());
    return -a;
  }
  if (accept("+")) return parse_unary();
  return parse_power();
}

Expr ExpressionParser::parse_power() {
  Expr base = parse_primary();
  if (accept("^")) return pow(base, parse_unary());
  return base;
}

Expr ExpressionParser::parse_primary() {
  const Token t = peek();
  if (t.kind == TokenKind::Number) {
    next();
    return Expr::constant(t.number);
  }
  if (accept("(")) {
    Expr e = parse_expression();
    expect(")");
    return e;
  }
  if (t.kind != TokenKind::Identifier) fail("expected an expression");
  next();
  if (accept("(")) {
    std::vector<Expr> args;
    if (!accept(")")) {
      do {
        args.push_back(parse_expression());
      } while (accept(","));
      expect(")");
    }
    auto arity = [&](std::size_t lo, std::size_t hi) {
      if (args.size() < lo || args.size() > hi)
        throw ParseError("wrong number of arguments to '" + t.text + "'", t.line, t.column);
    };
    if (t.text == "abs") {
      arity(1, 1);
      return abs(args[0]);
    }
    if (t.text == "min") {
      arity(2, 2);
      return min(args[0], args[1]);
    }
    if (t.text == "max") {
      arity(2, 2);
      return max(args[0], args[1]);
    }
    if (t.text == "sigp") {
      arity(2, 3);
      if (args.size() == 2) args.push_back(Expr::constant(default_hill_));
      return sigmoid_plus(args[0], args[1], args[2]);
    }
    throw ParseError("unknown function '" + t.text + "'", t.line, t.column);
  }
  return resolve_(t.text, t.line, t.column);
}

// ---------------------------------------------------------------------------
// Model file

namespace {

struct Line {
  int number = 0;
  std::string text;
  std::vector<Token> tokens;
};

std::string trim(std::string_view s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

class ModelParser {
public:
  explicit ModelParser(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string raw;
    int n = 0;
    while (std::getline(in, raw)) {
      ++n;
      const auto hash = raw.find('#');
      std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
      if (body.empty()) continue;
      lines_.push_back(Line{n, body, {}});
    }
  }

  Model run() {
    if (lines_.empty() || lines_.front().text != "modelfile v1")
      throw ParseError("expected header 'modelfile v1'", lines_.empty() ? 1 : lines_.front().number, 1);
    // Declarations first so that statements may reference names declared later.
    for (std::size_t k = 1; k < lines_.size(); ++k) {
      Line& l = lines_[k];
      const std::string kw = keyword(l.text);
      if (kw == "stl:" || kw == "stl") continue;
      if (kw == "derive-steady-state") continue;
      l.tokens = tokenize(l.text, l.number);
      if (kw == "unknown") parse_unknown(l);
      else if (kw == "state") parse_states(l);
      else if (kw == "option") parse_option(l);
      else if (kw == "name") parse_name(l);
    }
    model_.odes.assign(model_.states.size(), Expr());
    model_.ode_reconstructed.assign(model_.states.size(), false);
    std::vector<int> ode_line(model_.states.size(), 0);
    std::vector<Constraint> written;
    int derive_line = 0;
    for (std::size_t k = 1; k < lines_.size(); ++k) {
      Line& l = lines_[k];
      const std::string kw = keyword(l.text);
      if (kw == "unknown" || kw == "state" || kw == "option" || kw == "name") continue;
      if (kw == "derive-steady-state") {
        if (l.text != kw) throw ParseError("derive-steady-state takes no arguments", l.number, static_cast<int>(kw.size()) + 1);
        model_.derive_steady_state = true;
        derive_line = l.number;
      } else if (kw == "stl:" || kw == "stl") {
        std::string body = trim(std::string_view(l.text).substr(kw == "stl" ? 3 : 4));
        if (kw == "stl") {
          if (body.empty() || body.front() != ':') throw ParseError("expected 'stl:'", l.number, 4);
          body = trim(std::string_view(body).substr(1));
        }
        if (!model_.stl_spec.empty()) model_.stl_spec += ' ';
        model_.stl_spec += body;
      } else if (kw == "ode") {
        parse_ode(l, ode_line);
      } else if (kw == "constraint") {
        written.push_back(parse_constraint(l));
      } else if (kw == "derive") {
        parse_rule(l);
      } else if (kw == "event") {
        parse_event(l);
      } else {
        throw ParseError("unknown statement '" + kw + "'", l.number, 1);
      }
    }
    for (std::size_t s = 0; s < model_.states.size(); ++s) {
      if (ode_line[s] == 0) throw ParseError("state '" + model_.states[s] + "' has no ode", lines_.front().number, 1);
    }
    if (model_.derive_steady_state) add_steady_state_constraints(derive_line);
    for (auto& c : written) model_.constraints.push_back(std::move(c));
    std::set<std::string> ids;
    for (const auto& c : model_.constraints) {
      if (!ids.insert(c.id).second) throw DuplicateIdError(c.id, constraint_line_[c.id], 1);
    }
    for (const auto& r : model_.redundancy_rules) {
      if (!ids.count(r.source_id)) throw UndeclaredNameError(r.source_id, rule_line_[r.source_id], 8);
    }
    model_.finalize();
    return std::move(model_);
  }

private:
  static std::string keyword(const std::string& text) {
    const auto sp = text.find_first_of(" \t");
    return sp == std::string::npos ? text : text.substr(0, sp);
  }

  void declare(const std::string& n, int line, int column) {
    if (!names_.insert(n).second) throw DuplicateIdError(n, line, column);
  }

  void parse_name(Line& l) {
    ExpressionParser p(l.tokens, 1, nullptr);
    if (p.peek().kind != TokenKind::Identifier) p.fail("expected a model name");
    model_.name = p.next().text;
    if (p.peek().kind != TokenKind::End) p.fail("unexpected trailing input");
  }

  void parse_option(Line& l) {
    ExpressionParser p(l.tokens, 1, nullptr);
    if (p.peek().kind != TokenKind::Identifier) p.fail("expected an option name");
    const std::string key = p.next().text;
    model_.options[key] = p.parse_signed_number();
    if (p.peek().kind != TokenKind::End) p.fail("unexpected trailing input");
  }

  void parse_unknown(Line& l) {
    ExpressionParser p(l.tokens, 1, nullptr);
    const Token name = p.peek();
    if (name.kind != TokenKind::Identifier) p.fail("expected an unknown name");
    p.next();
    declare(name.text, name.line, name.column);
    if (!(p.peek().kind == TokenKind::Identifier && p.peek().text == "in")) p.fail("expected 'in'");
    p.next();
    p.expect("[");
    const double lo = p.parse_signed_number();
    p.expect(",");
    const double hi = p.parse_signed_number();
    p.expect("]");
    if (!(lo <= hi)) throw ParseError("empty domain for '" + name.text + "'", name.line, name.column);
    UnknownDecl u{name.text, Interval(lo, hi), Scale::Linear, false};
    bool explicit_scale = false;
    while (p.peek().kind == TokenKind::Identifier) {
      const std::string w = p.next().text;
      if (w == "scale") {
        if (p.peek().kind != TokenKind::Identifier) p.fail("expected 'log' or 'linear'");
        const std::string s = p.next().text;
        if (s == "log") u.scale = Scale::Log;
        else if (s == "linear") u.scale = Scale::Linear;
        else p.fail("expected 'log' or 'linear'");
        explicit_scale = true;
      } else if (w == "reconstructed") {
        u.reconstructed = true;
      } else {
        throw ParseError("unexpected '" + w + "'", name.line, name.column);
      }
    }
    if (p.peek().kind != TokenKind::End) p.fail("unexpected trailing input");
    if (!explicit_scale && lo > 0.0 && hi / lo >= 100.0) u.scale = Scale::Log;
    model_.unknowns.push_back(u);
  }

  void parse_states(Line& l) {
    ExpressionParser p(l.tokens, 1, nullptr);
    do {
      const Token t = p.peek();
      if (t.kind != TokenKind::Identifier) p.fail("expected a state name");
      p.next();
      declare(t.text, t.line, t.column);
      model_.states.push_back(t.text);
    } while (p.accept(","));
    if (p.peek().kind != TokenKind::End) p.fail("unexpected trailing input");
  }

  NameResolver resolver(bool allow_states) const {
    return [this, allow_states](const std::string& n, int line, int column) -> Expr {
      if (allow_states) {
        if (auto s = model_.state_index(n)) return Expr::state(*s, n);
      }
      if (auto u = model_.unknown_index(n)) return Expr::unknown(*u, n);
      throw UndeclaredNameError(n, line, column);
    };
  }

  double hill() const { return model_.option("hill_exponent", 4.0); }

  void parse_ode(Line& l, std::vector<int>& ode_line) {
    ExpressionParser p(l.tokens, 1, resolver(true), hill());
    const Token t = p.peek();
    if (t.kind != TokenKind::Identifier) p.fail("expected a state name");
    p.next();
    auto s = model_.state_index(t.text);
    if (!s) throw UndeclaredNameError(t.text, t.line, t.column);
    if (ode_line[*s]) throw DuplicateIdError("ode " + t.text, t.line, t.column);
    ode_line[*s] = l.number;
    if (p.accept("[")) {
      const Token f = p.next();
      if (f.text != "reconstructed") throw ParseError("unknown ode flag '" + f.text + "'", f.line, f.column);
      model_.ode_reconstructed[*s] = true;
      p.expect("]");
    }
    p.expect("=");
    model_.odes[*s] = p.parse_expression();
    if (p.peek().kind != TokenKind::End) p.fail("unexpected trailing input");
  }

  Relation parse_relation(ExpressionParser& p) {
    const Token t = p.peek();
    if (t.kind == TokenKind::Identifier && t.text == "in") {
      p.next();
      return Relation::In;
    }
    if (t.kind == TokenKind::Symbol) {
      if (t.text == "=" || t.text == "==") return p.next(), Relation::Eq;
      if (t.text == "<") return p.next(), Relation::Lt;
      if (t.text == "<=") return p.next(), Relation::Le;
      if (t.text == ">") return p.next(), Relation::Gt;
      if (t.text == ">=") return p.next(), Relation::Ge;
    }
    p.fail("expected a relation");
  }

  Constraint parse_constraint(Line& l) {
    ExpressionParser p(l.tokens, 1, resolver(false), hill());
    const Token id = p.peek();
    if (id.kind != TokenKind::Identifier) p.fail("expected a constraint id");
    p.next();
    Constraint c;
    c.id = id.text;
    if (constraint_line_.count(c.id)) throw DuplicateIdError(c.id, id.line, id.column);
    constraint_line_[c.id] = l.number;
    if (p.accept("[")) {
      do {
        const Token tag = p.peek();
        if (tag.kind != TokenKind::Identifier) p.fail("expected a tag");
        p.next();
        std::string name = tag.text;
        // tag names may contain hyphens: steady-state
        while (p.peek().kind == TokenKind::Symbol && p.peek().text == "-" && p.peek(1).kind == TokenKind::Identifier) {
          p.next();
          name += "-" + p.next().text;
        }
        if (name == "reliability") {
          p.expect("=");
          if (p.peek().kind != TokenKind::Identifier) p.fail("expected a reliability level");
          c.reliability = p.next().text;
        } else {
          c.tags.insert(name);
        }
      } while (p.accept(","));
      p.expect("]");
    }
    p.expect(":");
    c.lhs = p.parse_expression();
    c.relation = parse_relation(p);
    if (c.relation == Relation::In) {
      p.expect("[");
      const double lo = p.parse_signed_number();
      p.expect(",");
      const double hi = p.parse_signed_number();
      p.expect("]");
      if (!(lo <= hi)) throw ParseError("empty interval in constraint '" + c.id + "'", id.line, id.column);
      c.range = Interval(lo, hi);
      c.rhs = Expr::constant(0.0);
    } else {
      c.rhs = p.parse_expression();
    }
    if (p.peek().kind != TokenKind::End) p.fail("unexpected trailing input");
    return c;
  }

  void parse_rule(Line& l) {
    ExpressionParser p(l.tokens, 1, resolver(false), hill());
    const Token id = p.peek();
    if (id.kind != TokenKind::Identifier) p.fail("expected a constraint id");
    p.next();
    p.expect(":");
    RedundancyRule r;
    r.source_id = id.text;
    rule_line_[r.source_id] = l.number;
    r.sum = p.parse_expression();
    r.relation = parse_relation(p);
    if (r.relation != Relation::Lt && r.relation != Relation::Le) p.fail("derivation rules bound a sum from above");
    r.bound = p.parse_signed_number();
    if (p.peek().kind != TokenKind::End) p.fail("unexpected trailing input");
    model_.redundancy_rules.push_back(std::move(r));
  }

  void parse_event(Line& l) {
    ExpressionParser p(l.tokens, 1, resolver(false), hill());
    const Token label = p.peek();
    if (label.kind != TokenKind::Identifier) p.fail("expected an event label");
    p.next();
    Event e;
    e.label = label.text;
    if (!(p.peek().kind == TokenKind::Identifier && p.peek().text == "at")) p.fail("expected 'at'");
    p.next();
    e.time = p.parse_expression();
    p.expect(":");
    do {
      const Token target = p.peek();
      if (target.kind != TokenKind::Identifier) p.fail("expected an unknown name");
      p.next();
      auto u = model_.unknown_index(target.text);
      if (!u) throw UndeclaredNameError(target.text, target.line, target.column);
      p.expect("=");
      e.assignments.emplace_back(*u, p.parse_expression());
    } while (p.accept(","));
    if (p.peek().kind != TokenKind::End) p.fail("unexpected trailing input");
    model_.events.push_back(std::move(e));
  }

  void add_steady_state_constraints(int line) {
    std::vector<Expr> replacement;
    for (std::size_t s = 0; s < model_.states.size(); ++s) {
      const std::string eq = model_.states[s] + Model::kSteadySuffix;
      auto u = model_.unknown_index(eq);
      if (!u) throw UndeclaredNameError(eq, line, 1);
      replacement.push_back(Expr::unknown(*u, eq));
    }
    for (std::size_t s = 0; s < model_.states.size(); ++s) {
      Constraint c;
      c.id = "ss_" + model_.states[s];
      c.lhs = substitute_states(model_.odes[s], replacement);
      c.relation = Relation::Eq;
      c.rhs = Expr::constant(0.0);
      c.tags = {"steady-state"};
      c.generated = true;
      constraint_line_.emplace(c.id, line);
      model_.constraints.push_back(std::move(c));
    }
  }

  std::vector<Line> lines_;
  Model model_;
  std::set<std::string> names_;
  std::map<std::string, int> constraint_line_;
  std::map<std::string, int> rule_line_;
};

std::string tags_text(const Constraint& c) {
  std::vector<std::string> parts(c.tags.begin(), c.tags.end());
  if (!c.reliability.empty()) parts.push_back("reliability=" + c.reliability);
  if (parts.empty()) return "";
  std::string out = " [";
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? ", " : "") + parts[i];
  return out + "]";
}

}  // namespace

Model parse_model(std::string_view text) { return ModelParser(text).run(); }

Model load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read model file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

std::string print_model(const Model& m) {
  std::ostringstream out;
  out << "modelfile v1\n";
  if (!m.name.empty()) out << "name " << m.name << "\n";
  for (const auto& [k, v] : m.options) out << "option " << k << ' ' << format_number(v) << "\n";
  for (const auto& u : m.unknowns) {
    out << "unknown " << u.name << " in [" << format_number(u.domain.lo()) << ", " << format_number(u.domain.hi())
        << "] scale " << (u.scale == Scale::Log ? "log" : "linear") << (u.reconstructed ? " reconstructed" : "") << "\n";
  }
  if (!m.states.empty()) {
    out << "state ";
    for (std::size_t i = 0; i < m.states.size(); ++i) out << (i ? ", " : "") << m.states[i];
    out << "\n";
  }
  for (std::size_t s = 0; s < m.states.size(); ++s) {
    out << "ode " << m.states[s] << (m.ode_reconstructed[s] ? " [reconstructed]" : "") << " = " << to_string(m.odes[s])
        << "\n";
  }
  if (m.derive_steady_state) out << "derive-steady-state\n";
  for (const auto& c : m.constraints) {
    if (c.generated) continue;
    out << "constraint " << c.id << tags_text(c) << ": " << to_string(c.lhs) << ' ' << to_string(c.relation) << ' ';
    if (c.relation == Relation::In) {
      out << '[' << format_number(c.range.lo()) << ", " << format_number(c.range.hi()) << ']';
    } else {
      out << to_string(c.rhs);
    }
    out << "\n";
  }
  for (const auto& r : m.redundancy_rules) {
    out << "derive " << r.source_id << ": " << to_string(r.sum) << ' ' << to_string(r.relation) << ' '
        << format_number(r.bound) << "\n";
  }
  for (const auto& e : m.events) {
    out << "event " << e.label << " at " << to_string(e.time) << ": ";
    for (std::size_t i = 0; i < e.assignments.size(); ++i) {
      out << (i ? ", " : "") << m.unknowns[static_cast<std::size_t>(e.assignments[i].first)].name << " = "
          << to_string(e.assignments[i].second);
    }
    out << "\n";
  }
  if (!m.stl_spec.empty()) out << "stl: " << m.stl_spec << "\n";
  return out.str();
}

}  // namespace steadyscan
