#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tabling {

using SymbolId = std::uint32_t;

// Process-wide atom/functor interning. Two atoms are equal iff their ids are.
class SymbolTable {
public:
    SymbolId intern(std::string_view name);
    const std::string& name(SymbolId id) const;
    std::size_t size() const;

private:
    mutable std::shared_mutex mutex_;
    std::unordered_map<std::string, SymbolId> ids_;
    std::vector<const std::string*> names_;
};

SymbolTable& symbols();

class Term {
public:
    enum class Kind : std::uint8_t { Atom, Int, Var, Compound };

    Term() = default;

    static Term atom(SymbolId id);
    static Term atom(std::string_view name);
    static Term integer(std::int64_t value);
    static Term var(std::uint32_t id);
    // Throws std::invalid_argument when args is empty.
    static Term compound(SymbolId functor, std::vector<Term> args);
    static Term compound(std::string_view functor, std::vector<Term> args);

    Kind kind() const { return kind_; }
    bool is_atom() const { return kind_ == Kind::Atom; }
    bool is_int() const { return kind_ == Kind::Int; }
    bool is_var() const { return kind_ == Kind::Var; }
    bool is_compound() const { return kind_ == Kind::Compound; }

    SymbolId symbol() const { return static_cast<SymbolId>(value_); }
    std::int64_t int_value() const { return value_; }
    std::uint32_t var_id() const { return static_cast<std::uint32_t>(value_); }
    std::uint32_t arity() const { return static_cast<std::uint32_t>(args_.size()); }
    std::span<const Term> args() const { return args_; }

    bool is_ground() const;

    friend bool operator==(const Term&, const Term&) = default;
    friend std::strong_ordering operator<=>(const Term& a, const Term& b);

private:
    Kind kind_ = Kind::Atom;
    std::int64_t value_ = 0;
    std::vector<Term> args_;
};

std::string to_string(const Term& t);
std::size_t hash_value(const Term& t);

// One cell of the linear (pre-order) term encoding stored along trie paths.
struct Token {
    enum class Kind : std::uint8_t { Atom, Int, Var, Functor };

    Kind kind = Kind::Atom;
    std::uint32_t arity = 0;
    std::int64_t value = 0;

    static constexpr Token atom(SymbolId id) { return {Kind::Atom, 0, id}; }
    static constexpr Token integer(std::int64_t v) { return {Kind::Int, 0, v}; }
    static constexpr Token var(std::uint32_t index) { return {Kind::Var, 0, index}; }
    static constexpr Token functor(SymbolId id, std::uint32_t arity) { return {Kind::Functor, arity, id}; }

    bool is_constant() const { return kind == Kind::Atom || kind == Kind::Int; }

    friend bool operator==(const Token&, const Token&) = default;
    friend auto operator<=>(const Token&, const Token&) = default;
};

using TokenSeq = std::vector<Token>;

struct TokenHash {
    std::size_t operator()(const Token& t) const noexcept;
};

struct TokenSeqHash {
    std::size_t operator()(std::span<const Token> seq) const noexcept;
    std::size_t operator()(const TokenSeq& seq) const noexcept { return (*this)(std::span<const Token>(seq)); }
};

std::string to_string(const Token& t);

// Renames variables to 0,1,2,... in order of first occurrence (left-to-right, pre-order).
Term canonicalize_variant(const Term& t);
bool is_variant(const Term& a, const Term& b);

// Pre-order linearization. Variables are emitted with their ids, so the input
// should already be canonical for the output to be a variant key.
TokenSeq encode_term(const Term& t);
void encode_term(const Term& t, TokenSeq& out);
TokenSeq encode_tuple(std::span<const Term> terms);

// Decodes one term starting at pos and advances pos past it.
// Throws std::invalid_argument on a truncated sequence.
Term decode_term(std::span<const Token> toks, std::size_t& pos);
// Decodes exactly one term; trailing tokens are an error.
Term decode_term(std::span<const Token> toks);
std::vector<Term> decode_tuple(std::span<const Token> toks, std::size_t count);

Term token_to_constant(const Token& t);
Token constant_to_token(const Term& t);

} // namespace tabling

template <>
struct std::hash<tabling::Term> {
    std::size_t operator()(const tabling::Term& t) const noexcept { return tabling::hash_value(t); }
};

template <>
struct std::hash<tabling::Token> {
    std::size_t operator()(const tabling::Token& t) const noexcept { return tabling::TokenHash{}(t); }
};
