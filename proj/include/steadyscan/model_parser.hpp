#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "steadyscan/expr.hpp"
#include "steadyscan/model.hpp"

namespace steadyscan {

/// Parses the `modelfile v1` text format. Throws ParseError (and its
/// UndeclaredNameError / DuplicateIdError refinements) with line and column.
Model parse_model(std::string_view text);
Model load_model_file(const std::string& path);

/// Renders a model back to `modelfile v1`; parse_model(print_model(m)) is
/// structurally equal to m.
std::string print_model(const Model& m);

enum class TokenKind { End, Number, Identifier, Symbol };

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;
  double number = 0.0;
  int line = 1;
  int column = 1;
};

/// Tokenizer shared by the model file and STL grammars.
std::vector<Token> tokenize(std::string_view text, int line = 1, int column_offset = 0);

/// Maps an identifier to a leaf expression, or throws UndeclaredNameError.
using NameResolver = std::function<Expr(const std::string& name, int line, int column)>;

/// Recursive-descent arithmetic parser over a token stream.
class ExpressionParser {
public:
  ExpressionParser(const std::vector<Token>& tokens, std::size_t pos, NameResolver resolve, double default_hill = 4.0);

  Expr parse_expression();
  std::size_t position() const { return pos_; }
  const Token& peek(std::size_t ahead = 0) const;
  const Token& next();
  bool accept(std::string_view symbol);
  void expect(std::string_view symbol);
  double parse_signed_number();
  [[noreturn]] void fail(const std::string& what) const;

private:
  Expr parse_term();
  Expr parse_unary();
  Expr parse_power();
  Expr parse_primary();

  const std::vector<Token>& tokens_;
  std::size_t pos_;
  NameResolver resolve_;
  double default_hill_;
};

}  // namespace steadyscan
