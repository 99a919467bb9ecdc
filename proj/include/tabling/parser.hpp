#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include "tabling/program.hpp"
#include "tabling/term.hpp"

namespace tabling {

// Syntax and range-restriction errors. Line and column are 1-based.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, std::size_t column, const std::string& message);

    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }
    const std::string& message() const { return message_; }

private:
    std::size_t line_;
    std::size_t column_;
    std::string message_;
};

// Grammar:
//   :- table name/arity, name/arity.
//   head :- lit, ..., lit.
//   fact.
// Atoms start lowercase, variables uppercase or '_' ('_' alone is anonymous),
// integers are signed decimals, '%' starts a line comment. Variables are
// numbered per clause in order of first occurrence.
Program parse_program(std::string_view text);

// A single goal such as "path(X,Y)", optionally terminated by '.'.
Term parse_goal(std::string_view text);

} // namespace tabling
