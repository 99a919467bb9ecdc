#include "tabling/program.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace tabling {

Predicate predicate_of(const Term& literal) {
    if (literal.is_atom())
        return {literal.symbol(), 0};
    if (literal.is_compound())
        return {literal.symbol(), literal.arity()};
    throw std::invalid_argument("not a callable literal: " + to_string(literal));
}

std::string to_string(const Predicate& p) { return symbols().name(p.name) + "/" + std::to_string(p.arity); }

bool Program::is_tabled(const Predicate& p) const {
    return std::find(tabled.begin(), tabled.end(), p) != tabled.end();
}

std::string format_program(const Program& p) {
    std::ostringstream out;
    for (const auto& t : p.tabled)
        out << ":- table " << to_string(t) << ".\n";
    for (const auto& c : p.clauses) {
        out << to_string(c.head);
        for (std::size_t i = 0; i < c.body.size(); ++i)
            out << (i ? ", " : " :- ") << to_string(c.body[i]);
        out << ".\n";
    }
    for (const auto& f : p.facts)
        out << to_string(f) << ".\n";
    return out.str();
}

} // namespace tabling
