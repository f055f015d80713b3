#include "eoscript/script/lexer.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace eoscript::script {

SyntaxError::SyntaxError(int line, int col, const std::string& message)
    : std::runtime_error("SyntaxError at " + std::to_string(line) + ":" + std::to_string(col) + ": " + message),
      line_(line),
      col_(col),
      detail_(message) {}

const char* token_name(TokenKind kind) {
  switch (kind) {
    case TokenKind::Ident: return "identifier";
    case TokenKind::Int: return "integer";
    case TokenKind::Real: return "real";
    case TokenKind::String: return "string";
    case TokenKind::True: return "'True'";
    case TokenKind::False: return "'False'";
    case TokenKind::LParen: return "'('";
    case TokenKind::RParen: return "')'";
    case TokenKind::LBracket: return "'['";
    case TokenKind::RBracket: return "']'";
    case TokenKind::Comma: return "','";
    case TokenKind::Dot: return "'.'";
    case TokenKind::Assign: return "'='";
    case TokenKind::Plus: return "'+'";
    case TokenKind::Minus: return "'-'";
    case TokenKind::Star: return "'*'";
    case TokenKind::Slash: return "'/'";
    case TokenKind::EqEq: return "'=='";
    case TokenKind::NotEq: return "'!='";
    case TokenKind::Lt: return "'<'";
    case TokenKind::Le: return "'<='";
    case TokenKind::Gt: return "'>'";
    case TokenKind::Ge: return "'>='";
    case TokenKind::In: return "'in'";
    case TokenKind::Newline: return "end of line";
    case TokenKind::End: return "end of input";
  }
  return "token";
}

namespace {

constexpr std::array<std::string_view, 33> kReserved = {
    "and",   "as",     "assert", "async", "await",    "break", "class",  "continue", "def",   "del",   "elif",
    "else",  "except", "exec",   "finally", "for",    "from",  "global", "if",       "import", "is",   "lambda",
    "None",  "nonlocal", "not",  "or",    "pass",     "raise", "return", "try",      "while", "with",  "yield"};

bool ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }
bool digit(char c) { return c >= '0' && c <= '9'; }

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '\n') {
        if (depth_ == 0 && !tokens_.empty() && tokens_.back().kind != TokenKind::Newline) {
          push(TokenKind::Newline, line_, col_, line_, col_ + 1);
        }
        advance();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\f') {
        advance();
      } else if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (c == '\\') {
        fail("line continuation is not supported");
      } else if (ident_start(c)) {
        identifier();
      } else if (digit(c) || (c == '.' && pos_ + 1 < src_.size() && digit(src_[pos_ + 1]) && !after_operand())) {
        number();
      } else if (c == '"' || c == '\'') {
        string_literal(c);
      } else {
        punct();
      }
    }
    if (!tokens_.empty() && tokens_.back().kind != TokenKind::Newline) push(TokenKind::Newline, line_, col_, line_, col_);
    push(TokenKind::End, line_, col_, line_, col_);
    return std::move(tokens_);
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(line_, col_, msg); }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  bool after_operand() const {
    if (tokens_.empty()) return false;
    const auto k = tokens_.back().kind;
    return k == TokenKind::Ident || k == TokenKind::RParen || k == TokenKind::RBracket || k == TokenKind::Int ||
           k == TokenKind::Real || k == TokenKind::String;
  }

  Token& push(TokenKind kind, int line, int col, int end_line, int end_col) {
    Token t{kind, {}, 0, 0.0, Span{line, col, end_line, end_col}};
    tokens_.push_back(std::move(t));
    return tokens_.back();
  }

  void identifier() {
    const int l = line_, c = col_;
    const std::size_t start = pos_;
    while (pos_ < src_.size() && ident_char(src_[pos_])) advance();
    const std::string_view word = src_.substr(start, pos_ - start);
    for (auto r : kReserved) {
      if (word == r) throw SyntaxError(l, c, "'" + std::string(word) + "' is not part of the tool-script dialect");
    }
    if (word == "True") {
      push(TokenKind::True, l, c, line_, col_);
    } else if (word == "False") {
      push(TokenKind::False, l, c, line_, col_);
    } else if (word == "in") {
      push(TokenKind::In, l, c, line_, col_);
    } else {
      push(TokenKind::Ident, l, c, line_, col_).text = std::string(word);
    }
  }

  void number() {
    const int l = line_, c = col_;
    const std::size_t start = pos_;
    bool is_real = false;
    while (pos_ < src_.size() && digit(src_[pos_])) advance();
    if (pos_ < src_.size() && src_[pos_] == '.' && !(pos_ + 1 < src_.size() && ident_start(src_[pos_ + 1]))) {
      is_real = true;
      advance();
      while (pos_ < src_.size() && digit(src_[pos_])) advance();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) ++look;
      if (look < src_.size() && digit(src_[look])) {
        is_real = true;
        while (pos_ < look) advance();
        while (pos_ < src_.size() && digit(src_[pos_])) advance();
      }
    }
    if (pos_ < src_.size() && ident_char(src_[pos_])) throw SyntaxError(l, c, "malformed number");
    std::string text(src_.substr(start, pos_ - start));
    if (is_real) {
      if (text.front() == '.') text.insert(text.begin(), '0');
      double v = 0.0;
      const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
      if (res.ec != std::errc() || !std::isfinite(v)) throw SyntaxError(l, c, "real literal out of range: " + text);
      push(TokenKind::Real, l, c, line_, col_).real_value = v;
    } else {
      std::int64_t v = 0;
      const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
      if (res.ec != std::errc()) throw SyntaxError(l, c, "integer literal out of range: " + text);
      push(TokenKind::Int, l, c, line_, col_).int_value = v;
    }
  }

  static int hex_value(char h) {
    if (h >= '0' && h <= '9') return h - '0';
    if (h >= 'a' && h <= 'f') return h - 'a' + 10;
    if (h >= 'A' && h <= 'F') return h - 'A' + 10;
    return -1;
  }

  void string_literal(char quote) {
    const int l = line_, c = col_;
    if (src_.substr(pos_, 3) == std::string(3, quote)) fail("triple-quoted strings are not supported");
    advance();
    std::string value;
    while (true) {
      if (pos_ >= src_.size() || src_[pos_] == '\n') throw SyntaxError(l, c, "unterminated string literal");
      const char ch = src_[pos_];
      if (ch == quote) {
        advance();
        break;
      }
      if (ch == '\\') {
        advance();
        if (pos_ >= src_.size()) throw SyntaxError(l, c, "unterminated string literal");
        const char e = src_[pos_];
        switch (e) {
          case 'n': value += '\n'; break;
          case 't': value += '\t'; break;
          case 'r': value += '\r'; break;
          case '0': value += '\0'; break;
          case '\\': value += '\\'; break;
          case '\'': value += '\''; break;
          case '"': value += '"'; break;
          case 'x': {
            if (pos_ + 2 >= src_.size() || hex_value(src_[pos_ + 1]) < 0 || hex_value(src_[pos_ + 2]) < 0) {
              fail("malformed \\x escape");
            }
            value += static_cast<char>(hex_value(src_[pos_ + 1]) * 16 + hex_value(src_[pos_ + 2]));
            advance();
            advance();
            break;
          }
          default: fail(std::string("unknown escape \\") + e);
        }
        advance();
        continue;
      }
      value += ch;
      advance();
    }
    push(TokenKind::String, l, c, line_, col_).text = std::move(value);
  }

  void punct() {
    const int l = line_, c = col_;
    const char ch = src_[pos_];
    const char next = pos_ + 1 < src_.size() ? src_[pos_ + 1] : '\0';
    auto one = [&](TokenKind k) {
      advance();
      push(k, l, c, line_, col_);
    };
    auto two = [&](TokenKind k) {
      advance();
      advance();
      push(k, l, c, line_, col_);
    };
    switch (ch) {
      case '(': ++depth_; one(TokenKind::LParen); return;
      case '[': ++depth_; one(TokenKind::LBracket); return;
      case ')': if (depth_ > 0) --depth_; one(TokenKind::RParen); return;
      case ']': if (depth_ > 0) --depth_; one(TokenKind::RBracket); return;
      case ',': one(TokenKind::Comma); return;
      case '.': one(TokenKind::Dot); return;
      case '+': one(TokenKind::Plus); return;
      case '-': one(TokenKind::Minus); return;
      case '*': one(TokenKind::Star); return;
      case '/': one(TokenKind::Slash); return;
      case '=': next == '=' ? two(TokenKind::EqEq) : one(TokenKind::Assign); return;
      case '!':
        if (next == '=') {
          two(TokenKind::NotEq);
          return;
        }
        break;
      case '<': next == '=' ? two(TokenKind::Le) : one(TokenKind::Lt); return;
      case '>': next == '=' ? two(TokenKind::Ge) : one(TokenKind::Gt); return;
      default: break;
    }
    if (static_cast<unsigned char>(ch) < 0x20 || static_cast<unsigned char>(ch) >= 0x7f) {
      fail("unexpected character (byte " + std::to_string(static_cast<unsigned char>(ch)) + ")");
    }
    fail(std::string("unexpected character '") + ch + "'");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  int depth_ = 0;
  std::vector<Token> tokens_;
};

}  // namespace

std::vector<Token> tokenize(std::string_view source) { return Lexer(source).run(); }

}  // namespace eoscript::script
