#pragma once

#include <map>
#include <set>
#include <vector>

#include "tabling/program.hpp"
#include "tabling/term.hpp"

namespace tabling::oracle {

enum class Mode { SemiNaive, Naive };

using Tuple = std::vector<Term>;
using Relation = std::set<Tuple>;
using FactStore = std::map<Predicate, Relation>;

// Minimal model of a Datalog program by bottom-up iteration to fixpoint.
// Throws UnsupportedProgram for compound arguments, non-ground facts, or
// clauses that are not range-restricted.
FactStore minimal_model(const Program& program, Mode mode = Mode::SemiNaive);

// All ground instances of query in the minimal model.
AnswerSet oracle_solve(const Program& program, const Term& query, Mode mode = Mode::SemiNaive);

// Instances of query in an already computed model.
AnswerSet select(const FactStore& model, const Term& query);

} // namespace tabling::oracle
