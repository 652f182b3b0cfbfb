#pragma once

#include <cctype>
#include <string>
#include <string_view>

#include "hornbp/parse.hpp"

namespace hornbp::detail {

enum class Tok {
  Ident,   // lowercase-initial identifier or bare number (a constant)
  Var,     // uppercase-initial identifier
  Number,  // numeric literal
  LParen,
  RParen,
  Comma,
  Dot,
  Pipe,
  Slash,
  Arrow,  // <-
  Coloncolon,
  Equals,
  Question,
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int line = 1;
  int col = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }

  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    skip_ws();
    tok_.line = line_;
    tok_.col = col_;
    if (pos_ >= src_.size()) {
      tok_ = {Tok::End, "", line_, col_};
      return;
    }
    char c = src_[pos_];
    if (c == '(') { single(Tok::LParen, c); return; }
    if (c == ')') { single(Tok::RParen, c); return; }
    if (c == ',') { single(Tok::Comma, c); return; }
    if (c == '.') { single(Tok::Dot, c); return; }
    if (c == '|') { single(Tok::Pipe, c); return; }
    if (c == '/') { single(Tok::Slash, c); return; }
    if (c == '=') { single(Tok::Equals, c); return; }
    if (c == '?') { single(Tok::Question, c); return; }
    if (c == '<' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '-') {
      tok_ = {Tok::Arrow, "<-", line_, col_};
      bump(); bump();
      return;
    }
    if (c == ':' && pos_ + 1 < src_.size() && src_[pos_ + 1] == ':') {
      tok_ = {Tok::Coloncolon, "::", line_, col_};
      bump(); bump();
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+') {
      std::string text;
      int start_line = line_, start_col = col_;
      if (c == '-' || c == '+') { text += c; bump(); }
      bool any = false, dot_seen = false;
      while (pos_ < src_.size()) {
        char d = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(d))) {
          any = true;
          text += d;
          bump();
        } else if (d == '.' && !dot_seen && pos_ + 1 < src_.size() &&
                   std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
          // Only consume '.' when a digit follows, so "3." lexes as 3 then Dot.
          dot_seen = true;
          text += d;
          bump();
        } else {
          break;
        }
      }
      if (!any) throw ParseError("stray '" + text + "'", start_line, start_col);
      tok_ = {Tok::Number, text, start_line, start_col};
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string text;
      int start_line = line_, start_col = col_;
      while (pos_ < src_.size()) {
        char d = src_[pos_];
        if (std::isalnum(static_cast<unsigned char>(d)) || d == '_') {
          text += d;
          bump();
        } else {
          break;
        }
      }
      bool upper = std::isupper(static_cast<unsigned char>(text[0]));
      tok_ = {upper ? Tok::Var : Tok::Ident, text, start_line, start_col};
      return;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", line_, col_);
  }

  void single(Tok k, char c) {
    tok_ = {k, std::string(1, c), line_, col_};
    bump();
  }

  void skip_ws() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') bump();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        bump();
      } else {
        break;
      }
    }
  }

  void bump() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  std::string_view src_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  Token tok_;
};

}  // namespace hornbp::detail
