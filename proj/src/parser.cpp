#include "tabling/parser.hpp"

#include <cctype>
#include <charconv>
#include <map>
#include <set>

namespace tabling {

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& message) :
    std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
    line_(line), column_(column), message_(message) {}

namespace {

enum class Tok { Atom, Var, Int, LParen, RParen, Comma, Dot, Neck, Slash, End };

struct Lexeme {
    Tok kind;
    std::string text;
    std::size_t line;
    std::size_t column;
};

const char* describe(Tok t) {
    switch (t) {
    case Tok::Atom: return "atom";
    case Tok::Var: return "variable";
    case Tok::Int: return "integer";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::Comma: return "','";
    case Tok::Dot: return "'.'";
    case Tok::Neck: return "':-'";
    case Tok::Slash: return "'/'";
    case Tok::End: return "end of input";
    }
    return "?";
}

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    Lexeme next() {
        skip_blank();
        const std::size_t line = line_, column = column_;
        if (pos_ >= text_.size())
            return {Tok::End, "", line, column};
        const char c = text_[pos_];
        auto ident = [&] {
            const std::size_t start = pos_;
            while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                advance();
            return std::string(text_.substr(start, pos_ - start));
        };
        if (std::islower(static_cast<unsigned char>(c)))
            return {Tok::Atom, ident(), line, column};
        if (std::isupper(static_cast<unsigned char>(c)) || c == '_')
            return {Tok::Var, ident(), line, column};
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            ((c == '-' || c == '+') && pos_ + 1 < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
            const std::size_t start = pos_;
            advance();
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                advance();
            return {Tok::Int, std::string(text_.substr(start, pos_ - start)), line, column};
        }
        if (c == ':' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '-') {
            advance();
            advance();
            return {Tok::Neck, ":-", line, column};
        }
        advance();
        switch (c) {
        case '(': return {Tok::LParen, "(", line, column};
        case ')': return {Tok::RParen, ")", line, column};
        case ',': return {Tok::Comma, ",", line, column};
        case '.': return {Tok::Dot, ".", line, column};
        case '/': return {Tok::Slash, "/", line, column};
        default: break;
        }
        throw ParseError(line, column, std::string("unexpected character '") + c + "'");
    }

private:
    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        ++pos_;
    }

    void skip_blank() {
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (c == '%') {
                while (pos_ < text_.size() && text_[pos_] != '\n')
                    advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t column_ = 1;
};

class Parser {
public:
    explicit Parser(std::string_view text) : lex_(text) { look_ = lex_.next(); }

    Program program() {
        Program p;
        while (look_.kind != Tok::End) {
            if (look_.kind == Tok::Neck)
                directive(p);
            else
                clause(p);
        }
        return p;
    }

    Term goal() {
        Term t = literal();
        if (look_.kind == Tok::Dot)
            shift();
        expect(Tok::End);
        return t;
    }

private:
    Lexeme shift() {
        Lexeme cur = std::move(look_);
        look_ = lex_.next();
        return cur;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError(look_.line, look_.column, what + ", found " + describe(look_.kind) +
                                                      (look_.text.empty() ? "" : " '" + look_.text + "'"));
    }

    Lexeme expect(Tok kind) {
        if (look_.kind != kind)
            fail(std::string("expected ") + describe(kind));
        return shift();
    }

    void directive(Program& p) {
        shift();
        const Lexeme kw = expect(Tok::Atom);
        if (kw.text != "table")
            throw ParseError(kw.line, kw.column, "unknown directive '" + kw.text + "'");
        do {
            const Lexeme name = expect(Tok::Atom);
            expect(Tok::Slash);
            const Lexeme arity = expect(Tok::Int);
            std::uint32_t n = 0;
            auto [ptr, ec] = std::from_chars(arity.text.data(), arity.text.data() + arity.text.size(), n);
            if (ec != std::errc{} || ptr != arity.text.data() + arity.text.size())
                throw ParseError(arity.line, arity.column, "bad arity '" + arity.text + "'");
            const Predicate pred{symbols().intern(name.text), n};
            if (!p.is_tabled(pred))
                p.tabled.push_back(pred);
        } while (look_.kind == Tok::Comma && (shift(), true));
        expect(Tok::Dot);
    }

    void clause(Program& p) {
        vars_.clear();
        next_var_ = 0;
        const Lexeme start = look_;
        Term head = literal();
        if (look_.kind == Tok::Dot) {
            shift();
            if (!head.is_ground())
                throw ParseError(start.line, start.column, "fact " + to_string(head) + " is not ground");
            p.facts.push_back(std::move(head));
            return;
        }
        expect(Tok::Neck);
        Clause c{std::move(head), {}};
        c.body.push_back(literal());
        while (look_.kind == Tok::Comma) {
            shift();
            c.body.push_back(literal());
        }
        expect(Tok::Dot);

        std::set<std::uint32_t> body_vars;
        for (const Term& b : c.body)
            collect(b, body_vars);
        std::set<std::uint32_t> head_vars;
        collect(c.head, head_vars);
        for (const auto& [name, id] : vars_)
            if (head_vars.contains(id) && !body_vars.contains(id))
                throw ParseError(start.line, start.column,
                                 "clause is not range-restricted: head variable " + name + " does not occur in the body");
        p.clauses.push_back(std::move(c));
    }

    static void collect(const Term& t, std::set<std::uint32_t>& out) {
        if (t.is_var())
            out.insert(t.var_id());
        for (const Term& a : t.args())
            collect(a, out);
    }

    Term literal() {
        if (look_.kind != Tok::Atom)
            fail("expected a predicate name");
        return term();
    }

    Term term() {
        switch (look_.kind) {
        case Tok::Int: {
            const Lexeme tok = shift();
            std::int64_t v = 0;
            const char* first = tok.text.data() + (tok.text.front() == '+' ? 1 : 0);
            auto [ptr, ec] = std::from_chars(first, tok.text.data() + tok.text.size(), v);
            if (ec != std::errc{})
                throw ParseError(tok.line, tok.column, "integer out of range '" + tok.text + "'");
            return Term::integer(v);
        }
        case Tok::Var: {
            const Lexeme tok = shift();
            if (tok.text == "_")
                return Term::var(fresh());
            auto it = vars_.find(tok.text);
            if (it == vars_.end())
                it = vars_.emplace(tok.text, fresh()).first;
            return Term::var(it->second);
        }
        case Tok::Atom: {
            const Lexeme name = shift();
            if (look_.kind != Tok::LParen)
                return Term::atom(name.text);
            shift();
            std::vector<Term> args;
            args.push_back(term());
            while (look_.kind == Tok::Comma) {
                shift();
                args.push_back(term());
            }
            expect(Tok::RParen);
            return Term::compound(name.text, std::move(args));
        }
        default: fail("expected a term");
        }
    }

    std::uint32_t fresh() { return next_var_++; }

    Lexer lex_;
    Lexeme look_;
    std::map<std::string, std::uint32_t> vars_;
    std::uint32_t next_var_ = 0;
};

} // namespace

Program parse_program(std::string_view text) { return Parser(text).program(); }

Term parse_goal(std::string_view text) { return Parser(text).goal(); }

} // namespace tabling
