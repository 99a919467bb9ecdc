#include "tabling/term.hpp"

#include <mutex>
#include <stdexcept>
#include <unordered_map>

namespace tabling {

namespace {

std::size_t mix(std::size_t seed, std::size_t v) {
    return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

void canonicalize_into(const Term& t, std::unordered_map<std::uint32_t, std::uint32_t>& ids, Term& out) {
    switch (t.kind()) {
    case Term::Kind::Var: {
        auto [it, _] = ids.try_emplace(t.var_id(), static_cast<std::uint32_t>(ids.size()));
        out = Term::var(it->second);
        return;
    }
    case Term::Kind::Compound: {
        std::vector<Term> args(t.arity());
        for (std::size_t i = 0; i < args.size(); ++i)
            canonicalize_into(t.args()[i], ids, args[i]);
        out = Term::compound(t.symbol(), std::move(args));
        return;
    }
    default:
        out = t;
    }
}

} // namespace

SymbolId SymbolTable::intern(std::string_view name) {
    {
        std::shared_lock lock(mutex_);
        if (auto it = ids_.find(std::string(name)); it != ids_.end())
            return it->second;
    }
    std::unique_lock lock(mutex_);
    auto [it, inserted] = ids_.try_emplace(std::string(name), static_cast<SymbolId>(names_.size()));
    if (inserted)
        names_.push_back(&it->first);
    return it->second;
}

const std::string& SymbolTable::name(SymbolId id) const {
    std::shared_lock lock(mutex_);
    if (id >= names_.size())
        throw std::out_of_range("unknown symbol id " + std::to_string(id));
    return *names_[id];
}

std::size_t SymbolTable::size() const {
    std::shared_lock lock(mutex_);
    return names_.size();
}

SymbolTable& symbols() {
    static SymbolTable table;
    return table;
}

Term Term::atom(SymbolId id) {
    Term t;
    t.kind_ = Kind::Atom;
    t.value_ = id;
    return t;
}

Term Term::atom(std::string_view name) { return atom(symbols().intern(name)); }

Term Term::integer(std::int64_t value) {
    Term t;
    t.kind_ = Kind::Int;
    t.value_ = value;
    return t;
}

Term Term::var(std::uint32_t id) {
    Term t;
    t.kind_ = Kind::Var;
    t.value_ = id;
    return t;
}

Term Term::compound(SymbolId functor, std::vector<Term> args) {
    if (args.empty())
        throw std::invalid_argument("compound term needs at least one argument");
    Term t;
    t.kind_ = Kind::Compound;
    t.value_ = functor;
    t.args_ = std::move(args);
    return t;
}

Term Term::compound(std::string_view functor, std::vector<Term> args) {
    return compound(symbols().intern(functor), std::move(args));
}

bool Term::is_ground() const {
    if (kind_ == Kind::Var)
        return false;
    for (const auto& a : args_)
        if (!a.is_ground())
            return false;
    return true;
}

std::strong_ordering operator<=>(const Term& a, const Term& b) {
    if (a.kind_ != b.kind_)
        return a.kind_ <=> b.kind_;
    if (a.value_ != b.value_)
        return a.value_ <=> b.value_;
    if (a.args_.size() != b.args_.size())
        return a.args_.size() <=> b.args_.size();
    for (std::size_t i = 0; i < a.args_.size(); ++i)
        if (auto c = a.args_[i] <=> b.args_[i]; c != 0)
            return c;
    return std::strong_ordering::equal;
}

std::string to_string(const Term& t) {
    switch (t.kind()) {
    case Term::Kind::Atom:
        return symbols().name(t.symbol());
    case Term::Kind::Int:
        return std::to_string(t.int_value());
    case Term::Kind::Var:
        return "V" + std::to_string(t.var_id());
    case Term::Kind::Compound: {
        std::string s = symbols().name(t.symbol()) + "(";
        for (std::size_t i = 0; i < t.arity(); ++i) {
            if (i)
                s += ',';
            s += to_string(t.args()[i]);
        }
        return s + ")";
    }
    }
    return {};
}

std::size_t hash_value(const Term& t) {
    std::size_t h = mix(static_cast<std::size_t>(t.kind()), std::hash<std::int64_t>{}(
        t.is_int() ? t.int_value() : static_cast<std::int64_t>(t.is_var() ? t.var_id() : t.symbol())));
    for (const auto& a : t.args())
        h = mix(h, hash_value(a));
    return h;
}

std::size_t TokenHash::operator()(const Token& t) const noexcept {
    std::size_t h = std::hash<std::int64_t>{}(t.value);
    return mix(h, (static_cast<std::size_t>(t.kind) << 32) | t.arity);
}

std::size_t TokenSeqHash::operator()(std::span<const Token> seq) const noexcept {
    std::size_t h = seq.size();
    for (const auto& t : seq)
        h = mix(h, TokenHash{}(t));
    return h;
}

std::string to_string(const Token& t) {
    switch (t.kind) {
    case Token::Kind::Atom:
        return "atom(" + symbols().name(static_cast<SymbolId>(t.value)) + ")";
    case Token::Kind::Int:
        return "int(" + std::to_string(t.value) + ")";
    case Token::Kind::Var:
        return "var(" + std::to_string(t.value) + ")";
    case Token::Kind::Functor:
        return "functor(" + symbols().name(static_cast<SymbolId>(t.value)) + "/" + std::to_string(t.arity) + ")";
    }
    return {};
}

Term canonicalize_variant(const Term& t) {
    std::unordered_map<std::uint32_t, std::uint32_t> ids;
    Term out;
    canonicalize_into(t, ids, out);
    return out;
}

bool is_variant(const Term& a, const Term& b) { return canonicalize_variant(a) == canonicalize_variant(b); }

void encode_term(const Term& t, TokenSeq& out) {
    switch (t.kind()) {
    case Term::Kind::Atom:
        out.push_back(Token::atom(t.symbol()));
        break;
    case Term::Kind::Int:
        out.push_back(Token::integer(t.int_value()));
        break;
    case Term::Kind::Var:
        out.push_back(Token::var(t.var_id()));
        break;
    case Term::Kind::Compound:
        out.push_back(Token::functor(t.symbol(), t.arity()));
        for (const auto& a : t.args())
            encode_term(a, out);
        break;
    }
}

TokenSeq encode_term(const Term& t) {
    TokenSeq out;
    encode_term(t, out);
    return out;
}

TokenSeq encode_tuple(std::span<const Term> terms) {
    TokenSeq out;
    for (const auto& t : terms)
        encode_term(t, out);
    return out;
}

Term decode_term(std::span<const Token> toks, std::size_t& pos) {
    if (pos >= toks.size())
        throw std::invalid_argument("truncated token sequence");
    const Token& tok = toks[pos++];
    switch (tok.kind) {
    case Token::Kind::Atom:
        return Term::atom(static_cast<SymbolId>(tok.value));
    case Token::Kind::Int:
        return Term::integer(tok.value);
    case Token::Kind::Var:
        return Term::var(static_cast<std::uint32_t>(tok.value));
    case Token::Kind::Functor: {
        std::vector<Term> args;
        args.reserve(tok.arity);
        for (std::uint32_t i = 0; i < tok.arity; ++i)
            args.push_back(decode_term(toks, pos));
        return Term::compound(static_cast<SymbolId>(tok.value), std::move(args));
    }
    }
    throw std::invalid_argument("bad token kind");
}

Term decode_term(std::span<const Token> toks) {
    std::size_t pos = 0;
    Term t = decode_term(toks, pos);
    if (pos != toks.size())
        throw std::invalid_argument("trailing tokens after term");
    return t;
}

std::vector<Term> decode_tuple(std::span<const Token> toks, std::size_t count) {
    std::vector<Term> out;
    out.reserve(count);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < count; ++i)
        out.push_back(decode_term(toks, pos));
    if (pos != toks.size())
        throw std::invalid_argument("trailing tokens after tuple");
    return out;
}

Term token_to_constant(const Token& t) {
    switch (t.kind) {
    case Token::Kind::Atom:
        return Term::atom(static_cast<SymbolId>(t.value));
    case Token::Kind::Int:
        return Term::integer(t.value);
    default:
        throw std::invalid_argument("token is not a constant: " + to_string(t));
    }
}

Token constant_to_token(const Term& t) {
    if (t.is_atom())
        return Token::atom(t.symbol());
    if (t.is_int())
        return Token::integer(t.int_value());
    throw std::invalid_argument("term is not a constant: " + to_string(t));
}

} // namespace tabling
