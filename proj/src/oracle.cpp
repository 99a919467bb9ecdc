#include "tabling/oracle.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace tabling::oracle {

namespace {

using Subst = std::map<std::uint32_t, Term>;

std::span<const Term> args_of(const Term& literal) {
    return literal.is_compound() ? literal.args() : std::span<const Term>{};
}

void require_flat(const Term& literal, const char* where) {
    if (!literal.is_atom() && !literal.is_compound())
        throw UnsupportedProgram(std::string(where) + " is not a predicate literal: " + to_string(literal));
    for (const Term& a : args_of(literal))
        if (a.is_compound())
            throw UnsupportedProgram(std::string("compound argument in ") + where + ": " + to_string(literal));
}

void collect_vars(const Term& t, std::set<std::uint32_t>& out) {
    if (t.is_var())
        out.insert(t.var_id());
    for (const Term& a : t.args())
        collect_vars(a, out);
}

void validate(const Program& p) {
    for (const Term& f : p.facts) {
        require_flat(f, "fact");
        if (!f.is_ground())
            throw UnsupportedProgram("non-ground fact: " + to_string(f));
    }
    for (const Clause& c : p.clauses) {
        require_flat(c.head, "clause head");
        std::set<std::uint32_t> head_vars, body_vars;
        collect_vars(c.head, head_vars);
        for (const Term& b : c.body) {
            require_flat(b, "body literal");
            collect_vars(b, body_vars);
        }
        for (std::uint32_t v : head_vars)
            if (!body_vars.contains(v))
                throw UnsupportedProgram("clause is not range-restricted: " + to_string(c.head));
    }
}

// Extends s so that pattern matches the ground tuple; s is left untouched on failure.
bool match(std::span<const Term> pattern, const Tuple& tuple, Subst& s, std::vector<std::uint32_t>& bound) {
    bound.clear();
    bool ok = true;
    for (std::size_t i = 0; ok && i < pattern.size(); ++i) {
        const Term& p = pattern[i];
        if (!p.is_var()) {
            ok = p == tuple[i];
        } else if (auto it = s.find(p.var_id()); it != s.end()) {
            ok = it->second == tuple[i];
        } else {
            s.emplace(p.var_id(), tuple[i]);
            bound.push_back(p.var_id());
        }
    }
    if (!ok)
        for (std::uint32_t v : bound)
            s.erase(v);
    return ok;
}

Tuple instantiate(std::span<const Term> pattern, const Subst& s) {
    Tuple out;
    out.reserve(pattern.size());
    for (const Term& p : pattern)
        out.push_back(p.is_var() ? s.at(p.var_id()) : p);
    return out;
}

// Joins body literals left to right against sources[i], adding head instances to out.
void join(const Clause& c, std::size_t i, const std::vector<const Relation*>& sources, Subst& s, Relation& out) {
    if (i == c.body.size()) {
        out.insert(instantiate(args_of(c.head), s));
        return;
    }
    std::span<const Term> pattern = args_of(c.body[i]);
    std::vector<std::uint32_t> bound;
    for (const Tuple& t : *sources[i]) {
        if (!match(pattern, t, s, bound))
            continue;
        std::vector<std::uint32_t> mine = bound;
        join(c, i + 1, sources, s, out);
        for (std::uint32_t v : mine)
            s.erase(v);
    }
}

const Relation& relation(const FactStore& db, const Predicate& p) {
    static const Relation empty;
    auto it = db.find(p);
    return it == db.end() ? empty : it->second;
}

// One application of the immediate-consequence operator over the full store.
FactStore derive_all(const Program& p, const FactStore& db) {
    FactStore derived;
    for (const Clause& c : p.clauses) {
        std::vector<const Relation*> sources;
        for (const Term& b : c.body)
            sources.push_back(&relation(db, predicate_of(b)));
        Subst s;
        join(c, 0, sources, s, derived[predicate_of(c.head)]);
    }
    return derived;
}

// Moves tuples of derived that are absent from db into both db and the returned delta.
FactStore absorb(FactStore& db, FactStore& derived) {
    FactStore delta;
    for (auto& [pred, rel] : derived)
        for (const Tuple& t : rel)
            if (db[pred].insert(t).second)
                delta[pred].insert(t);
    return delta;
}

} // namespace

FactStore minimal_model(const Program& program, Mode mode) {
    validate(program);
    FactStore db;
    for (const Term& f : program.facts) {
        auto a = args_of(f);
        db[predicate_of(f)].insert(Tuple(a.begin(), a.end()));
    }

    std::set<Predicate> intensional;
    for (const Clause& c : program.clauses)
        intensional.insert(predicate_of(c.head));

    FactStore derived = derive_all(program, db);
    FactStore delta = absorb(db, derived);
    while (!delta.empty()) {
        if (mode == Mode::Naive) {
            derived = derive_all(program, db);
            delta = absorb(db, derived);
            continue;
        }
        FactStore next;
        for (const Clause& c : program.clauses) {
            for (std::size_t i = 0; i < c.body.size(); ++i) {
                const Predicate bp = predicate_of(c.body[i]);
                if (!intensional.contains(bp) || !delta.contains(bp))
                    continue;
                std::vector<const Relation*> sources;
                for (std::size_t j = 0; j < c.body.size(); ++j)
                    sources.push_back(j == i ? &delta.at(bp) : &relation(db, predicate_of(c.body[j])));
                Subst s;
                join(c, 0, sources, s, next[predicate_of(c.head)]);
            }
        }
        delta = absorb(db, next);
    }
    return db;
}

AnswerSet select(const FactStore& model, const Term& query) {
    require_flat(query, "query");
    AnswerSet out;
    const Predicate p = predicate_of(query);
    std::vector<std::uint32_t> bound;
    for (const Tuple& t : relation(model, p)) {
        Subst s;
        if (!match(args_of(query), t, s, bound))
            continue;
        out.push_back(t.empty() ? query : Term::compound(p.name, t));
    }
    std::sort(out.begin(), out.end());
    return out;
}

AnswerSet oracle_solve(const Program& program, const Term& query, Mode mode) {
    return select(minimal_model(program, mode), query);
}

} // namespace tabling::oracle
