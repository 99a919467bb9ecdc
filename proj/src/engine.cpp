#include "tabling/engine.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <exception>
#include <functional>
#include <set>
#include <stdexcept>
#include <thread>
#include <unordered_map>

namespace tabling {

namespace {

struct Arg {
    bool is_var = false;
    std::uint32_t var = 0;
    Token constant{};
};

struct Literal {
    std::uint32_t pred = 0;
    std::vector<Arg> args;
};

struct Rule {
    Literal head;
    std::vector<Literal> body;
    std::uint32_t num_vars = 0;
};

struct FactTable {
    std::size_t arity = 0;
    std::size_t rows = 0;
    std::vector<Token> cells; // row-major
    std::unordered_map<Token, std::vector<std::uint32_t>> by_first;

    std::span<const Token> row(std::uint32_t r) const { return {cells.data() + r * arity, arity}; }
};

struct PredInfo {
    Predicate pred;
    bool tabled = false;
    std::vector<std::uint32_t> rules;
    FactTable facts;
};

} // namespace

struct CompiledProgram::Impl {
    std::vector<PredInfo> preds;
    std::unordered_map<Predicate, std::uint32_t> index;
    std::vector<Rule> rules;
    std::vector<Predicate> tabled;

    std::uint32_t intern(const Predicate& p) {
        auto [it, inserted] = index.try_emplace(p, static_cast<std::uint32_t>(preds.size()));
        if (inserted) {
            preds.push_back({});
            preds.back().pred = p;
            preds.back().facts.arity = p.arity;
        }
        return it->second;
    }

    const PredInfo* find(const Predicate& p) const {
        auto it = index.find(p);
        return it == index.end() ? nullptr : &preds[it->second];
    }

    Literal compile_literal(const Term& t, std::unordered_map<std::uint32_t, std::uint32_t>& vars) {
        Literal lit;
        lit.pred = intern(predicate_of(t));
        for (const Term& a : t.args()) {
            Arg arg;
            if (a.is_var()) {
                arg.is_var = true;
                arg.var = vars.try_emplace(a.var_id(), static_cast<std::uint32_t>(vars.size())).first->second;
            } else if (a.is_atom() || a.is_int()) {
                arg.constant = constant_to_token(a);
            } else {
                throw UnsupportedProgram("compound argument in " + to_string(t) + " (engine programs are Datalog)");
            }
            lit.args.push_back(arg);
        }
        return lit;
    }

    void add_rule(Rule rule) {
        const std::uint32_t id = static_cast<std::uint32_t>(rules.size());
        preds[rule.head.pred].rules.push_back(id);
        rules.push_back(std::move(rule));
    }

    void check_recursion() const;
};

void CompiledProgram::Impl::check_recursion() const {
    // Tarjan over the predicate dependency graph; any cycle must be fully tabled.
    const std::size_t n = preds.size();
    std::vector<std::vector<std::uint32_t>> succ(n);
    for (const Rule& r : rules)
        for (const Literal& b : r.body)
            succ[r.head.pred].push_back(b.pred);

    std::vector<int> order(n, -1), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<std::uint32_t> stack;
    int counter = 0;
    std::function<void(std::uint32_t)> visit = [&](std::uint32_t v) {
        order[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack[v] = true;
        for (std::uint32_t w : succ[v]) {
            if (order[w] < 0) {
                visit(w);
                low[v] = std::min(low[v], low[w]);
            } else if (on_stack[w]) {
                low[v] = std::min(low[v], order[w]);
            }
        }
        if (low[v] != order[v])
            return;
        std::vector<std::uint32_t> component;
        std::uint32_t w;
        do {
            w = stack.back();
            stack.pop_back();
            on_stack[w] = false;
            component.push_back(w);
        } while (w != v);
        const bool cyclic = component.size() > 1 ||
                            std::find(succ[v].begin(), succ[v].end(), v) != succ[v].end();
        if (!cyclic)
            return;
        for (std::uint32_t p : component)
            if (!preds[p].tabled)
                throw UnsupportedProgram("recursive predicate " + to_string(preds[p].pred) + " is not tabled");
    };
    for (std::uint32_t v = 0; v < n; ++v)
        if (order[v] < 0)
            visit(v);
}

CompiledProgram::CompiledProgram(const Program& program) : impl_(std::make_unique<Impl>()) {
    Impl& m = *impl_;
    for (const Predicate& p : program.tabled) {
        const std::uint32_t id = m.intern(p);
        if (!m.preds[id].tabled) {
            m.preds[id].tabled = true;
            m.tabled.push_back(p);
        }
    }

    std::set<std::pair<std::uint32_t, std::vector<Token>>> seen_facts;
    for (const Term& f : program.facts) {
        if (!f.is_ground())
            throw UnsupportedProgram("non-ground fact: " + to_string(f));
        std::unordered_map<std::uint32_t, std::uint32_t> vars;
        Literal lit = m.compile_literal(f, vars);
        PredInfo& info = m.preds[lit.pred];
        std::vector<Token> row;
        for (const Arg& a : lit.args)
            row.push_back(a.constant);
        if (!seen_facts.emplace(lit.pred, row).second)
            continue;
        if (info.tabled) {
            m.add_rule(Rule{std::move(lit), {}, 0});
            continue;
        }
        const auto r = static_cast<std::uint32_t>(info.facts.rows++);
        if (!row.empty())
            info.facts.by_first[row.front()].push_back(r);
        info.facts.cells.insert(info.facts.cells.end(), row.begin(), row.end());
    }

    for (const Clause& c : program.clauses) {
        std::unordered_map<std::uint32_t, std::uint32_t> vars;
        Rule rule;
        for (const Term& b : c.body)
            rule.body.push_back(m.compile_literal(b, vars));
        const std::size_t body_vars = vars.size();
        rule.head = m.compile_literal(c.head, vars);
        if (vars.size() != body_vars)
            throw UnsupportedProgram("clause for " + to_string(c.head) + " is not range-restricted");
        rule.num_vars = static_cast<std::uint32_t>(vars.size());
        m.add_rule(std::move(rule));
    }

    m.check_recursion();
}

CompiledProgram::~CompiledProgram() = default;

const std::vector<Predicate>& CompiledProgram::tabled() const { return impl_->tabled; }

EvalStats& EvalStats::operator+=(const EvalStats& o) {
    tabled_calls += o.tabled_calls;
    derivations += o.derivations;
    new_answer_calls += o.new_answer_calls;
    new_for_thread += o.new_for_thread;
    incomplete_consumptions += o.incomplete_consumptions;
    sccs_completed += o.sccs_completed;
    frames_completed += o.frames_completed;
    rounds += o.rounds;
    max_rounds = std::max(max_rounds, o.max_rounds);
    discipline_violations += o.discipline_violations;
    return *this;
}

void validate(const EvalConfig& cfg) {
    if (cfg.threads == 0 || cfg.threads > kMaxThreads)
        throw ConfigError("thread count must be in [1, " + std::to_string(kMaxThreads) + "]");
    if (cfg.design != Design::NS && cfg.sync == SyncMode::None)
        throw ConfigError(std::string("design ") + to_string(cfg.design) +
                          " shares tries between threads and needs lock or trylock");
}

namespace {

// Local evaluation for one thread. Subgoals are completed as soon as their SCC
// reaches a fixpoint; answers leave an SCC only after it is complete.
class ThreadSolver {
public:
    ThreadSolver(const CompiledProgram::Impl& prog, TableSpace& tables, std::size_t ti) :
        prog_(prog), tables_(tables), ti_(ti), entries_(prog.preds.size(), nullptr) {
        for (std::size_t p = 0; p < prog.preds.size(); ++p) {
            if (!prog.preds[p].tabled)
                continue;
            entries_[p] = tables.table_entry(prog.preds[p].pred);
            if (!entries_[p])
                throw std::logic_error("table space has no entry for " + to_string(prog.preds[p].pred));
        }
    }

    ThreadResult run(const Term& query);

private:
    struct Binding {
        bool bound = false;
        Token value{};
    };
    using Env = std::vector<Binding>;

    struct PatArg {
        bool bound = false;
        Token value{};
        std::uint32_t free_id = 0;
    };
    using Pattern = std::vector<PatArg>;
    using TupleFn = std::function<void(std::span<const Token>)>;

    struct StackEntry {
        SubgoalFrame* frame;
        std::uint32_t pred;
        TokenSeq call; // argument tokens of the canonical call
    };

    struct Dependency {
        SubgoalFrame* consumer;
        SubgoalFrame* producer;
    };

    static Pattern make_pattern(const Literal& lit, const Env& env) {
        Pattern pat(lit.args.size());
        for (std::size_t j = 0; j < lit.args.size(); ++j) {
            const Arg& a = lit.args[j];
            if (!a.is_var)
                pat[j] = {true, a.constant, 0};
            else if (env[a.var].bound)
                pat[j] = {true, env[a.var].value, 0};
            else
                pat[j] = {false, {}, a.var};
        }
        return pat;
    }

    SubgoalFrame& call_frame(std::uint32_t pred, const Pattern& pat, std::vector<std::uint32_t>& canon_of);
    void call_tabled(std::uint32_t pred, const Pattern& pat, const TupleFn& fn);
    void generate(SubgoalFrame& frame, std::uint32_t pred, TokenSeq call);
    void resolve(std::size_t k);
    void complete_scc(std::size_t pos, std::uint64_t rounds);
    void emit_answer(const StackEntry& e, const Literal& head, const Env& env);

    void enumerate(std::uint32_t pred, const Pattern& pat, const TupleFn& fn);
    void enumerate_facts(const FactTable& facts, const Pattern& pat, const TupleFn& fn) const;
    void enumerate_rule(const Rule& rule, const Pattern& pat, const TupleFn& fn);
    void solve_body(const Rule& rule, std::size_t i, Env& env, const std::function<void()>& done);

    const CompiledProgram::Impl& prog_;
    TableSpace& tables_;
    std::size_t ti_;
    std::vector<TableEntry*> entries_;

    std::deque<StackEntry> stack_; // dependency stack of evaluating frames
    SubgoalFrame* current_ = nullptr;
    std::uint64_t next_dfn_ = 0;
    std::vector<Dependency> deps_;
    std::vector<std::uint32_t> trail_;
    std::vector<Token> answer_buf_;
    std::vector<bool> answer_set_;
    EvalStats stats_;
};

SubgoalFrame& ThreadSolver::call_frame(std::uint32_t pred, const Pattern& pat, std::vector<std::uint32_t>& canon_of) {
    const Predicate& p = prog_.preds[pred].pred;
    TokenSeq key;
    key.reserve(pat.size() + 1);
    key.push_back(p.arity ? Token::functor(p.name, p.arity) : Token::atom(p.name));
    canon_of.assign(pat.size(), 0);
    std::vector<std::uint32_t> free_ids;
    for (std::size_t j = 0; j < pat.size(); ++j) {
        if (pat[j].bound) {
            key.push_back(pat[j].value);
            continue;
        }
        auto it = std::find(free_ids.begin(), free_ids.end(), pat[j].free_id);
        const auto k = static_cast<std::uint32_t>(it - free_ids.begin());
        if (it == free_ids.end())
            free_ids.push_back(pat[j].free_id);
        canon_of[j] = k;
        key.push_back(Token::var(k));
    }

    ++stats_.tabled_calls;
    SubgoalFrame& frame = tables_.tabled_subgoal_call(*entries_[pred], key, ti_);
    if (frame.is_complete())
        return frame;
    if (frame.scc.dfn == SccInfo::kUnvisited) {
        generate(frame, pred, TokenSeq(key.begin() + 1, key.end()));
        if (!frame.is_complete() && current_)
            current_->scc.low = std::min(current_->scc.low, frame.scc.low);
    } else if (current_) {
        current_->scc.low = std::min(current_->scc.low, frame.scc.dfn);
    }
    if (!frame.is_complete()) {
        ++stats_.incomplete_consumptions;
        if (current_)
            deps_.push_back({current_, &frame});
    }
    return frame;
}

void ThreadSolver::call_tabled(std::uint32_t pred, const Pattern& pat, const TupleFn& fn) {
    std::vector<std::uint32_t> canon_of;
    SubgoalFrame& frame = call_frame(pred, pat, canon_of);
    // Walking the chain also visits answers appended while we consume.
    const AnswerChain& chain = tables_.answer_chain(frame);
    TokenSeq answer;
    std::vector<Token> full(pat.size());
    for (TrieNode* leaf = chain.head(); leaf; leaf = AnswerChain::next(*leaf)) {
        trie_path_tokens(*leaf, answer);
        for (std::size_t j = 0; j < pat.size(); ++j)
            full[j] = pat[j].bound ? pat[j].value : answer[canon_of[j]];
        fn(full);
    }
}

void ThreadSolver::generate(SubgoalFrame& frame, std::uint32_t pred, TokenSeq call) {
    frame.scc.dfn = frame.scc.low = next_dfn_++;
    stack_.push_back({&frame, pred, std::move(call)});
    const std::size_t pos = stack_.size() - 1;

    std::uint64_t new_before = stats_.new_for_thread;
    const std::uint64_t consumed_before = stats_.incomplete_consumptions;
    resolve(pos);
    if (frame.scc.low < frame.scc.dfn)
        return; // an older frame leads this SCC

    // Re-derive the whole SCC until a round adds nothing new for this thread.
    // Without consumption of incomplete tables one pass is already a fixpoint.
    bool again = stats_.incomplete_consumptions != consumed_before && stats_.new_for_thread != new_before;
    std::uint64_t rounds = 1;
    while (again) {
        new_before = stats_.new_for_thread;
        for (std::size_t k = stack_.size(); k-- > pos;)
            resolve(k);
        ++rounds;
        for (std::size_t k = pos; k < stack_.size(); ++k)
            frame.scc.low = std::min(frame.scc.low, stack_[k].frame->scc.low);
        if (frame.scc.low < frame.scc.dfn) {
            stats_.rounds += rounds;
            return; // merged into an older SCC
        }
        again = stats_.new_for_thread != new_before;
    }
    complete_scc(pos, rounds);
}

void ThreadSolver::complete_scc(std::size_t pos, std::uint64_t rounds) {
    const std::uint64_t leader = stack_[pos].frame->scc.dfn;
    std::vector<SubgoalFrame*> members;
    members.reserve(stack_.size() - pos);
    for (std::size_t k = pos; k < stack_.size(); ++k)
        members.push_back(stack_[k].frame);

    // Every incomplete table a member consumed must be completed together with it.
    auto is_member = [&](const SubgoalFrame* f) { return !f->is_complete() && f->scc.dfn >= leader; };
    auto keep = std::partition(deps_.begin(), deps_.end(), [&](const Dependency& d) { return !is_member(d.consumer); });
    for (auto it = keep; it != deps_.end(); ++it)
        if (!is_member(it->producer))
            ++stats_.discipline_violations;
    deps_.erase(keep, deps_.end());

    tables_.mark_complete(members);
    stack_.erase(stack_.begin() + static_cast<std::ptrdiff_t>(pos), stack_.end());
    ++stats_.sccs_completed;
    stats_.frames_completed += members.size();
    stats_.rounds += rounds;
    stats_.max_rounds = std::max(stats_.max_rounds, rounds);
}

void ThreadSolver::resolve(std::size_t k) {
    const StackEntry& e = stack_[k];
    SubgoalFrame* saved = current_;
    current_ = e.frame;
    for (std::uint32_t r : prog_.preds[e.pred].rules) {
        const Rule& rule = prog_.rules[r];
        Env env(rule.num_vars);
        bool ok = true;
        for (std::size_t j = 0; ok && j < e.call.size(); ++j) {
            const Token& c = e.call[j];
            if (c.kind == Token::Kind::Var)
                continue;
            const Arg& h = rule.head.args[j];
            if (!h.is_var)
                ok = h.constant == c;
            else if (env[h.var].bound)
                ok = env[h.var].value == c;
            else
                env[h.var] = {true, c};
        }
        if (ok)
            solve_body(rule, 0, env, [&] { emit_answer(e, rule.head, env); });
    }
    current_ = saved;
}

void ThreadSolver::emit_answer(const StackEntry& e, const Literal& head, const Env& env) {
    const std::size_t arity = e.frame->answer_arity();
    answer_buf_.assign(arity, Token{});
    answer_set_.assign(arity, false);
    for (std::size_t j = 0; j < e.call.size(); ++j) {
        const Token& c = e.call[j];
        if (c.kind != Token::Kind::Var)
            continue;
        const Arg& h = head.args[j];
        if (h.is_var && !env[h.var].bound)
            throw std::logic_error("unbound head variable after body resolution");
        const Token value = h.is_var ? env[h.var].value : h.constant;
        const auto k = static_cast<std::size_t>(c.value);
        if (answer_set_[k] && answer_buf_[k] != value)
            return; // call aliases two positions the head instance does not
        answer_buf_[k] = value;
        answer_set_[k] = true;
    }
    ++stats_.derivations;
    ++stats_.new_answer_calls;
    // New or repeated, resolution continues with the next alternative.
    if (tables_.new_answer(*e.frame, answer_buf_))
        ++stats_.new_for_thread;
}

void ThreadSolver::enumerate(std::uint32_t pred, const Pattern& pat, const TupleFn& fn) {
    const PredInfo& info = prog_.preds[pred];
    if (info.tabled) {
        call_tabled(pred, pat, fn);
        return;
    }
    enumerate_facts(info.facts, pat, fn);
    for (std::uint32_t r : info.rules)
        enumerate_rule(prog_.rules[r], pat, fn);
}

void ThreadSolver::enumerate_facts(const FactTable& facts, const Pattern& pat, const TupleFn& fn) const {
    if (facts.rows == 0)
        return;
    if (facts.arity == 0) {
        fn({});
        return;
    }
    auto matches = [&](std::span<const Token> row) {
        for (std::size_t j = 1; j < row.size(); ++j)
            if (pat[j].bound && pat[j].value != row[j])
                return false;
        return true;
    };
    if (pat[0].bound) {
        auto it = facts.by_first.find(pat[0].value);
        if (it == facts.by_first.end())
            return;
        for (std::uint32_t r : it->second)
            if (auto row = facts.row(r); matches(row))
                fn(row);
        return;
    }
    for (std::uint32_t r = 0; r < facts.rows; ++r)
        if (auto row = facts.row(r); matches(row))
            fn(row);
}

void ThreadSolver::enumerate_rule(const Rule& rule, const Pattern& pat, const TupleFn& fn) {
    Env env(rule.num_vars);
    for (std::size_t j = 0; j < pat.size(); ++j) {
        if (!pat[j].bound)
            continue;
        const Arg& h = rule.head.args[j];
        if (!h.is_var) {
            if (h.constant != pat[j].value)
                return;
        } else if (env[h.var].bound) {
            if (env[h.var].value != pat[j].value)
                return;
        } else {
            env[h.var] = {true, pat[j].value};
        }
    }
    std::vector<Token> tuple(rule.head.args.size());
    solve_body(rule, 0, env, [&] {
        for (std::size_t j = 0; j < tuple.size(); ++j) {
            const Arg& h = rule.head.args[j];
            tuple[j] = h.is_var ? env[h.var].value : h.constant;
        }
        fn(tuple);
    });
}

void ThreadSolver::solve_body(const Rule& rule, std::size_t i, Env& env, const std::function<void()>& done) {
    if (i == rule.body.size()) {
        done();
        return;
    }
    const Literal& lit = rule.body[i];
    enumerate(lit.pred, make_pattern(lit, env), [&](std::span<const Token> tuple) {
        const std::size_t mark = trail_.size();
        bool ok = true;
        for (std::size_t j = 0; ok && j < lit.args.size(); ++j) {
            const Arg& a = lit.args[j];
            if (!a.is_var) {
                ok = a.constant == tuple[j];
            } else if (env[a.var].bound) {
                ok = env[a.var].value == tuple[j];
            } else {
                env[a.var] = {true, tuple[j]};
                trail_.push_back(a.var);
            }
        }
        if (ok)
            solve_body(rule, i + 1, env, done);
        for (std::size_t t = mark; t < trail_.size(); ++t)
            env[trail_[t]].bound = false;
        trail_.resize(mark);
    });
}

ThreadResult ThreadSolver::run(const Term& query) {
    const Predicate qp = predicate_of(query);
    auto it = prog_.index.find(qp);
    if (it == prog_.index.end() || !prog_.preds[it->second].tabled)
        throw UnsupportedProgram("query predicate " + to_string(qp) + " is not tabled");
    const std::uint32_t pred = it->second;

    std::vector<Term> vars; // query variables in first-occurrence order
    Pattern pat;
    for (const Term& a : query.args()) {
        if (a.is_var()) {
            auto pos = std::find(vars.begin(), vars.end(), a);
            if (pos == vars.end())
                pos = vars.insert(vars.end(), a);
            pat.push_back({false, {}, static_cast<std::uint32_t>(pos - vars.begin())});
        } else if (a.is_atom() || a.is_int()) {
            pat.push_back({true, constant_to_token(a), 0});
        } else {
            throw UnsupportedProgram("compound argument in query " + to_string(query));
        }
    }

    std::vector<std::uint32_t> canon_of;
    SubgoalFrame& frame = call_frame(pred, pat, canon_of);
    ThreadResult result;
    for (const std::vector<Term>& tuple : tables_.answers_of(frame)) {
        if (qp.arity == 0) {
            result.answers.push_back(query);
            continue;
        }
        std::vector<Term> args;
        args.reserve(pat.size());
        for (std::size_t j = 0; j < pat.size(); ++j)
            args.push_back(pat[j].bound ? token_to_constant(pat[j].value) : tuple[canon_of[j]]);
        result.answers.push_back(Term::compound(qp.name, std::move(args)));
    }
    std::sort(result.answers.begin(), result.answers.end());
    result.answers.erase(std::unique(result.answers.begin(), result.answers.end()), result.answers.end());
    result.stats = stats_;
    return result;
}

} // namespace

ThreadResult solve_thread(const CompiledProgram& program, TableSpace& tables, const Term& query, std::size_t ti) {
    ThreadSolver solver(program.impl(), tables, ti);
    return solver.run(query);
}

AnswerSet solve_thread(const Program& program, const Term& query, std::size_t ti, const EvalConfig& cfg) {
    validate(cfg);
    CompiledProgram compiled(program);
    TableSpace tables(cfg.design, cfg.sync, cfg.threads, compiled.tabled());
    return solve_thread(compiled, tables, query, ti).answers;
}

ParallelResult solve_parallel(const CompiledProgram& program, const EvalConfig& cfg) {
    validate(cfg);
    TableSpace tables(cfg.design, cfg.sync, cfg.threads, program.tabled());
    std::vector<ThreadResult> results(cfg.threads);
    std::vector<std::exception_ptr> errors(cfg.threads);

    const auto start = std::chrono::steady_clock::now();
    {
        std::vector<std::jthread> workers;
        workers.reserve(cfg.threads);
        for (std::size_t ti = 0; ti < cfg.threads; ++ti) {
            workers.emplace_back([&, ti] {
                try {
                    results[ti] = solve_thread(program, tables, cfg.query, ti);
                } catch (...) {
                    errors[ti] = std::current_exception();
                }
                tables.release_thread(ti);
            });
        }
    }
    const auto stop = std::chrono::steady_clock::now();

    for (const auto& e : errors)
        if (e)
            std::rethrow_exception(e);

    ParallelResult out;
    out.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
    out.counters = tables.snapshot_counters();
    out.released = tables.released_counters();
    for (ThreadResult& r : results) {
        out.answers.push_back(std::move(r.answers));
        out.stats.push_back(r.stats);
    }
    return out;
}

ParallelResult solve_parallel(const Program& program, const EvalConfig& cfg) {
    CompiledProgram compiled(program);
    return solve_parallel(compiled, cfg);
}

} // namespace tabling
