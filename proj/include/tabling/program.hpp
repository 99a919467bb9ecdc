#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "tabling/term.hpp"

namespace tabling {

struct Predicate {
    SymbolId name = 0;
    std::uint32_t arity = 0;

    friend bool operator==(const Predicate&, const Predicate&) = default;
    friend auto operator<=>(const Predicate&, const Predicate&) = default;
};

// Raised for programs outside the supported Datalog fragment.
class UnsupportedProgram : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Ground instances of a query, sorted and duplicate-free.
using AnswerSet = std::vector<Term>;

// Atoms have arity 0; compounds use their functor. Throws for ints and variables.
Predicate predicate_of(const Term& literal);
std::string to_string(const Predicate& p);

struct Clause {
    Term head;
    std::vector<Term> body;
};

// Plain data: the engine and the oracle each compile it their own way.
struct Program {
    std::vector<Predicate> tabled;
    std::vector<Clause> clauses;
    std::vector<Term> facts;

    bool is_tabled(const Predicate& p) const;
};

// Renders a program in the textual format accepted by parse_program.
std::string format_program(const Program& p);

} // namespace tabling

template <>
struct std::hash<tabling::Predicate> {
    std::size_t operator()(const tabling::Predicate& p) const noexcept {
        return (static_cast<std::size_t>(p.name) << 8) ^ p.arity;
    }
};
