#include "iop/protocol.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace iop {

std::string_view to_string(Adornment a) {
  switch (a) {
    case Adornment::In:
      return "in";
    case Adornment::Out:
      return "out";
    case Adornment::Nil:
      return "nil";
  }
  return "?";
}

std::string_view to_string(Severity s) {
  switch (s) {
    case Severity::Error:
      return "error";
    case Severity::Warning:
      return "warning";
    case Severity::Info:
      return "info";
  }
  return "?";
}

const ParameterDecl* MessageSchema::find(std::string_view parameter) const {
  for (const auto& p : parameters)
    if (p.name == parameter) return &p;
  return nullptr;
}

std::vector<std::string> MessageSchema::with(Adornment a) const {
  std::vector<std::string> out;
  for (const auto& p : parameters)
    if (p.adornment == a) out.push_back(p.name);
  return out;
}

bool ProtocolSpec::has_role(std::string_view role) const {
  return std::find(roles.begin(), roles.end(), role) != roles.end();
}

const MessageSchema* ProtocolSpec::message(std::string_view name) const {
  for (const auto& m : messages)
    if (m.name == name) return &m;
  return nullptr;
}

const ParameterDecl* ProtocolSpec::parameter(std::string_view name) const {
  for (const auto& p : parameters)
    if (p.name == name) return &p;
  return nullptr;
}

std::vector<std::string> ProtocolSpec::keys() const {
  std::vector<std::string> out;
  for (const auto& p : parameters)
    if (p.is_key) out.push_back(p.name);
  return out;
}

bool ProtocolSpec::is_key(std::string_view parameter) const {
  const auto* p = this->parameter(parameter);
  return p != nullptr && p->is_key;
}

ProtocolError::ProtocolError(Kind kind, std::string message, std::size_t line,
                             std::size_t column)
    : std::runtime_error(line == 0 ? std::move(message)
                                   : std::to_string(line) + ":" +
                                         std::to_string(column) + ": " +
                                         message),
      kind_(kind),
      line_(line),
      column_(column) {}

namespace {

enum class Tok { Ident, LBrace, RBrace, LBracket, RBracket, Comma, Colon, Arrow, End };

struct Token {
  Tok type;
  std::string text;
  std::size_t line;
  std::size_t column;
};

std::string_view describe(Tok t) {
  switch (t) {
    case Tok::Ident:
      return "identifier";
    case Tok::LBrace:
      return "'{'";
    case Tok::RBrace:
      return "'}'";
    case Tok::LBracket:
      return "'['";
    case Tok::RBracket:
      return "']'";
    case Tok::Comma:
      return "','";
    case Tok::Colon:
      return "':'";
    case Tok::Arrow:
      return "'->'";
    case Tok::End:
      return "end of input";
  }
  return "?";
}

bool ident_char(unsigned char c) { return std::isalnum(c) || c == '_'; }

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  std::size_t line = 1, col = 1, i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else if ((static_cast<unsigned char>(src[i]) & 0xC0) != 0x80) {
        ++col;  // count code points, not bytes
      }
    }
  };
  while (i < src.size()) {
    const auto c = static_cast<unsigned char>(src[i]);
    if (std::isspace(c)) {
      advance(1);
      continue;
    }
    if (src.substr(i, 2) == "//") {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    const std::size_t l = line, k = col;
    auto single = [&](Tok t) {
      out.push_back({t, std::string(1, src[i]), l, k});
      advance(1);
    };
    switch (c) {
      case '{':
        single(Tok::LBrace);
        continue;
      case '}':
        single(Tok::RBrace);
        continue;
      case '[':
        single(Tok::LBracket);
        continue;
      case ']':
        single(Tok::RBracket);
        continue;
      case ',':
        single(Tok::Comma);
        continue;
      case ':':
        single(Tok::Colon);
        continue;
      default:
        break;
    }
    if (src.substr(i, 2) == "->") {
      out.push_back({Tok::Arrow, "->", l, k});
      advance(2);
      continue;
    }
    if (src.substr(i, 3) == "\xE2\x86\xA6") {  // U+21A6 ↦
      out.push_back({Tok::Arrow, "\xE2\x86\xA6", l, k});
      advance(3);
      continue;
    }
    if (ident_char(c)) {
      std::size_t j = i;
      while (j < src.size() && ident_char(static_cast<unsigned char>(src[j]))) ++j;
      out.push_back({Tok::Ident, std::string(src.substr(i, j - i)), l, k});
      advance(j - i);
      continue;
    }
    throw ProtocolError(ProtocolError::Kind::Syntax,
                        "unexpected character '" + std::string(1, src[i]) + "'", l, k);
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  ProtocolSpec parse() {
    ProtocolSpec spec;
    std::string name;
    while (peek().type == Tok::Ident) {
      if (!name.empty()) name += ' ';
      name += next().text;
    }
    if (name.empty()) fail("expected protocol name");
    spec.name = std::move(name);
    expect(Tok::LBrace);

    const auto& roles_kw = expect(Tok::Ident);
    if (roles_kw.text != "role" && roles_kw.text != "roles")
      fail_at(roles_kw, "expected 'roles', found '" + roles_kw.text + "'");
    do {
      const auto& r = expect(Tok::Ident);
      if (spec.has_role(r.text))
        throw ProtocolError(ProtocolError::Kind::DuplicateName,
                            "duplicate role " + r.text, r.line, r.column);
      spec.roles.push_back(r.text);
    } while (accept(Tok::Comma));

    const auto& params_kw = expect(Tok::Ident);
    if (params_kw.text != "parameter" && params_kw.text != "parameters")
      fail_at(params_kw, "expected 'parameters', found '" + params_kw.text + "'");
    spec.parameters = parameter_list("protocol " + spec.name);

    std::set<std::string> key_names;
    for (const auto& p : spec.parameters)
      if (p.is_key) key_names.insert(p.name);

    while (peek().type != Tok::RBrace) {
      if (peek().type == Tok::End) fail("expected '}'");
      MessageSchema m;
      const auto& from = expect(Tok::Ident);
      m.sender = from.text;
      expect(Tok::Arrow);
      const auto& to = expect(Tok::Ident);
      m.receiver = to.text;
      expect(Tok::Colon);
      const auto& mname = expect(Tok::Ident);
      m.name = mname.text;
      if (peek().type == Tok::Ident || peek().type == Tok::LBrace)
        throw ProtocolError(ProtocolError::Kind::Unsupported,
                            "protocol composition is unsupported (reference to " +
                                m.name + ")",
                            mname.line, mname.column);
      expect(Tok::LBracket);
      m.parameters = parameter_list("message " + m.name);
      expect(Tok::RBracket);

      for (const auto* role_tok : {&from, &to})
        if (!spec.has_role(role_tok->text))
          throw ProtocolError(ProtocolError::Kind::UnknownRole,
                              "unknown role " + role_tok->text + " in message " + m.name,
                              role_tok->line, role_tok->column);
      if (spec.message(m.name) != nullptr)
        throw ProtocolError(ProtocolError::Kind::DuplicateName,
                            "duplicate message " + m.name, mname.line, mname.column);
      for (const auto& p : m.parameters) {
        if (spec.parameter(p.name) == nullptr)
          throw ProtocolError(ProtocolError::Kind::Unsupported,
                              "private parameter " + p.name + " in message " + m.name +
                                  " is unsupported",
                              mname.line, mname.column);
        if (p.is_key) key_names.insert(p.name);
      }
      spec.messages.push_back(std::move(m));
    }
    expect(Tok::RBrace);
    if (peek().type != Tok::End) fail("unexpected input after protocol");
    if (spec.messages.empty()) fail("protocol declares no messages");

    for (auto& p : spec.parameters) p.is_key = key_names.count(p.name) > 0;
    for (auto& m : spec.messages)
      for (auto& p : m.parameters) p.is_key = key_names.count(p.name) > 0;
    return spec;
  }

 private:
  std::vector<ParameterDecl> parameter_list(const std::string& where) {
    std::vector<ParameterDecl> out;
    do {
      const auto& adorn = expect(Tok::Ident);
      ParameterDecl p;
      if (adorn.text == "in")
        p.adornment = Adornment::In;
      else if (adorn.text == "out")
        p.adornment = Adornment::Out;
      else if (adorn.text == "nil")
        p.adornment = Adornment::Nil;
      else
        fail_at(adorn, "expected adornment in/out/nil, found '" + adorn.text + "'");
      const auto& name = expect(Tok::Ident);
      p.name = name.text;
      if (peek().type == Tok::Ident && peek().text == "key") {
        next();
        p.is_key = true;
      }
      for (const auto& q : out)
        if (q.name == p.name)
          throw ProtocolError(ProtocolError::Kind::DuplicateName,
                              "duplicate parameter " + p.name + " in " + where, name.line,
                              name.column);
      out.push_back(std::move(p));
    } while (accept(Tok::Comma));
    return out;
  }

  const Token& peek() const { return toks_[pos_]; }
  const Token& next() {
    const auto& t = toks_[pos_];
    if (t.type != Tok::End) ++pos_;
    return t;
  }
  bool accept(Tok t) {
    if (peek().type != t) return false;
    next();
    return true;
  }
  const Token& expect(Tok t) {
    if (peek().type != t)
      fail("expected " + std::string(describe(t)) + ", found " +
           (peek().type == Tok::End ? std::string("end of input")
                                    : "'" + peek().text + "'"));
    return next();
  }
  [[noreturn]] void fail(const std::string& msg) const { fail_at(peek(), msg); }
  [[noreturn]] static void fail_at(const Token& t, const std::string& msg) {
    throw ProtocolError(ProtocolError::Kind::Syntax, msg, t.line, t.column);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

ProtocolSpec parse_protocol(std::string_view source) {
  return Parser(lex(source)).parse();
}

ProtocolSpec load_protocol(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in)
    throw ProtocolError(ProtocolError::Kind::Io, "cannot read " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_protocol(buf.str());
}

std::vector<Diagnostic> validate_protocol(const ProtocolSpec& spec) {
  std::vector<Diagnostic> out;
  auto error = [&](std::string m) { out.push_back({Severity::Error, std::move(m)}); };

  if (spec.roles.size() < 2) error("protocol declares fewer than two roles");
  if (spec.messages.empty()) error("protocol declares no messages");
  const auto keys = spec.keys();
  if (keys.empty()) error("protocol declares no key parameter");

  for (const auto& m : spec.messages) {
    if (!spec.has_role(m.sender)) error("message " + m.name + " has unknown sender " + m.sender);
    if (!spec.has_role(m.receiver))
      error("message " + m.name + " has unknown receiver " + m.receiver);
    if (m.sender == m.receiver)
      error("message " + m.name + " has identical sender and receiver " + m.sender);
    for (const auto& k : keys)
      if (!m.has(k)) error("message " + m.name + " missing key " + k);
    for (const auto& p : m.parameters)
      if (spec.parameter(p.name) == nullptr)
        error("message " + m.name + " uses undeclared parameter " + p.name);
  }

  for (const auto& p : spec.parameters) {
    if (p.adornment != Adornment::Out) continue;
    const bool bindable = std::any_of(spec.messages.begin(), spec.messages.end(), [&](const auto& m) {
      const auto* q = m.find(p.name);
      return q != nullptr && q->adornment == Adornment::Out;
    });
    if (!bindable)
      out.push_back({Severity::Warning, p.name + " never adorned out in any message"});
  }

  for (const auto& p : spec.parameters) {
    std::vector<std::string> sources;
    for (const auto& m : spec.messages) {
      const auto* q = m.find(p.name);
      if (q != nullptr && q->adornment == Adornment::Out) sources.push_back(m.name);
    }
    if (sources.size() < 2) continue;
    std::string list;
    for (const auto& s : sources) list += (list.empty() ? "" : ", ") + s;
    out.push_back({Severity::Info, "potential safety conflict: " + p.name +
                                       " is adorned out in " + list});
  }
  return out;
}

bool has_errors(const std::vector<Diagnostic>& diagnostics) {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

std::string format_protocol(const ProtocolSpec& spec) {
  std::ostringstream os;
  auto param = [&](const ParameterDecl& p, bool with_key) {
    os << to_string(p.adornment) << ' ' << p.name;
    if (with_key && p.is_key) os << " key";
  };
  os << spec.name << " {\n  roles ";
  for (std::size_t i = 0; i < spec.roles.size(); ++i) os << (i ? ", " : "") << spec.roles[i];
  os << "\n  parameters ";
  for (std::size_t i = 0; i < spec.parameters.size(); ++i) {
    if (i) os << ", ";
    param(spec.parameters[i], true);
  }
  os << "\n\n";
  for (const auto& m : spec.messages) {
    os << "  " << m.sender << " -> " << m.receiver << ": " << m.name << '[';
    for (std::size_t i = 0; i < m.parameters.size(); ++i) {
      if (i) os << ", ";
      param(m.parameters[i], false);
    }
    os << "]\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace iop
