#include "tabling/bench.hpp"

#include <charconv>

namespace tabling::bench {

namespace {

constexpr GraphKind kSuiteKinds[] = {GraphKind::BTree, GraphKind::Pyramid, GraphKind::Cycle, GraphKind::Grid};

Term edge(std::uint64_t from, std::uint64_t to) {
    return Term::compound("edge", {Term::integer(static_cast<std::int64_t>(from)),
                                   Term::integer(static_cast<std::int64_t>(to))});
}

} // namespace

std::string to_string(GraphKind k) {
    switch (k) {
    case GraphKind::BTree: return "btree";
    case GraphKind::Pyramid: return "pyramid";
    case GraphKind::Cycle: return "cycle";
    case GraphKind::Grid: return "grid";
    case GraphKind::Triangle: return "triangle";
    }
    return "?";
}

std::string to_string(Recursion r) { return r == Recursion::Left ? "pathleft" : "pathright"; }

std::uint32_t desk_cap(GraphKind k) {
    switch (k) {
    case GraphKind::BTree: return 12;
    case GraphKind::Pyramid: return 400;
    case GraphKind::Cycle: return 400;
    case GraphKind::Grid: return 12;
    case GraphKind::Triangle: return 30;
    }
    return 0;
}

std::uint32_t desk_depth(GraphKind k) {
    switch (k) {
    case GraphKind::BTree: return 10;
    case GraphKind::Pyramid: return 100;
    case GraphKind::Cycle: return 100;
    case GraphKind::Grid: return 8;
    case GraphKind::Triangle: return 10;
    }
    return 0;
}

std::uint32_t large_depth(GraphKind k) {
    switch (k) {
    case GraphKind::BTree: return 18;
    case GraphKind::Pyramid: return 2000;
    case GraphKind::Cycle: return 2000;
    case GraphKind::Grid: return 35;
    case GraphKind::Triangle: return 30;
    }
    return 0;
}

std::uint64_t node_count(const EdgeConfig& c) {
    const std::uint64_t d = c.depth;
    switch (c.kind) {
    case GraphKind::BTree: return (std::uint64_t{1} << d) - 1;
    case GraphKind::Pyramid: return 2 * d + 1;
    case GraphKind::Cycle: return d;
    case GraphKind::Grid: return d * d;
    case GraphKind::Triangle: return d * (d + 1) / 2;
    }
    return 0;
}

std::vector<Term> gen_edges(const EdgeConfig& c, bool allow_large) {
    if (c.depth == 0)
        throw BenchError("depth must be at least 1");
    if (c.depth > desk_cap(c.kind) && !allow_large)
        throw BenchError(to_string(c.kind) + " depth " + std::to_string(c.depth) + " exceeds the desk cap of " +
                         std::to_string(desk_cap(c.kind)) + " (use the paper-scale override)");
    if (c.kind == GraphKind::BTree && c.depth > 40)
        throw BenchError("btree depth above 40 is not representable");

    const std::uint64_t d = c.depth;
    std::vector<Term> out;
    switch (c.kind) {
    case GraphKind::BTree: {
        const std::uint64_t last = node_count(c);
        for (std::uint64_t i = 1; 2 * i <= last; ++i) {
            out.push_back(edge(i, 2 * i));
            if (2 * i + 1 <= last)
                out.push_back(edge(i, 2 * i + 1));
        }
        break;
    }
    case GraphKind::Pyramid: {
        // Apex 1 over two descending sides joined by a base edge:
        // left side 2,4,..,2d and right side 3,5,..,2d+1.
        out.push_back(edge(1, 2));
        out.push_back(edge(1, 3));
        for (std::uint64_t r = 1; r < d; ++r) {
            out.push_back(edge(2 * r, 2 * r + 2));
            out.push_back(edge(2 * r + 1, 2 * r + 3));
        }
        out.push_back(edge(2 * d, 2 * d + 1));
        break;
    }
    case GraphKind::Cycle:
        for (std::uint64_t i = 1; i < d; ++i)
            out.push_back(edge(i, i + 1));
        out.push_back(edge(d, 1));
        break;
    case GraphKind::Grid: {
        auto id = [d](std::uint64_t r, std::uint64_t col) { return (r - 1) * d + col; };
        for (std::uint64_t r = 1; r <= d; ++r)
            for (std::uint64_t col = 1; col <= d; ++col) {
                if (col < d) {
                    out.push_back(edge(id(r, col), id(r, col + 1)));
                    out.push_back(edge(id(r, col + 1), id(r, col)));
                }
                if (r < d) {
                    out.push_back(edge(id(r, col), id(r + 1, col)));
                    out.push_back(edge(id(r + 1, col), id(r, col)));
                }
            }
        break;
    }
    case GraphKind::Triangle: {
        auto id = [](std::uint64_t r, std::uint64_t col) { return r * (r - 1) / 2 + col; };
        for (std::uint64_t r = 1; r < d; ++r)
            for (std::uint64_t col = 1; col <= r; ++col) {
                out.push_back(edge(id(r, col), id(r + 1, col)));
                out.push_back(edge(id(r, col), id(r + 1, col + 1)));
            }
        break;
    }
    }
    return out;
}

Program make_program(const BenchInstance& b, bool allow_large) {
    const Term X = Term::var(0), Y = Term::var(1), Z = Term::var(2);
    auto path = [](Term a, Term c) { return Term::compound("path", {std::move(a), std::move(c)}); };
    auto edge_lit = [](Term a, Term c) { return Term::compound("edge", {std::move(a), std::move(c)}); };

    Program p;
    p.tabled.push_back(Predicate{symbols().intern("path"), 2});
    if (b.recursion == Recursion::Left)
        p.clauses.push_back({path(X, Z), {path(X, Y), edge_lit(Y, Z)}});
    else
        p.clauses.push_back({path(X, Z), {edge_lit(X, Y), path(Y, Z)}});
    p.clauses.push_back({path(X, Z), {edge_lit(X, Z)}});
    p.facts = gen_edges(b.config, allow_large);
    return p;
}

Term default_query() { return Term::compound("path", {Term::var(0), Term::var(1)}); }

BenchInstance parse_bench_spec(std::string_view spec) {
    auto bad = [&](const std::string& why) {
        return BenchError("bad bench spec '" + std::string(spec) + "': " + why);
    };
    const auto first = spec.find(':');
    const auto second = first == std::string_view::npos ? first : spec.find(':', first + 1);
    if (second == std::string_view::npos)
        throw bad("expected RECURSION:GRAPH:DEPTH");
    const std::string_view rec = spec.substr(0, first);
    const std::string_view graph = spec.substr(first + 1, second - first - 1);
    const std::string_view depth = spec.substr(second + 1);

    BenchInstance b;
    if (rec == "pathleft")
        b.recursion = Recursion::Left;
    else if (rec == "pathright")
        b.recursion = Recursion::Right;
    else
        throw bad("recursion must be pathleft or pathright");

    bool found = false;
    for (GraphKind k : {GraphKind::BTree, GraphKind::Pyramid, GraphKind::Cycle, GraphKind::Grid, GraphKind::Triangle})
        if (graph == to_string(k)) {
            b.config.kind = k;
            found = true;
        }
    if (!found)
        throw bad("graph must be btree, pyramid, cycle, grid or triangle");

    std::uint32_t d = 0;
    auto [ptr, ec] = std::from_chars(depth.data(), depth.data() + depth.size(), d);
    if (ec != std::errc{} || ptr != depth.data() + depth.size() || d == 0)
        throw bad("depth must be a positive integer");
    b.config.depth = d;
    return b;
}

std::string bench_name(const BenchInstance& b) {
    return to_string(b.recursion) + ":" + to_string(b.config.kind) + ":" + std::to_string(b.config.depth);
}

std::vector<BenchInstance> desk_suite() {
    std::vector<BenchInstance> out;
    for (Recursion r : {Recursion::Left, Recursion::Right})
        for (GraphKind k : kSuiteKinds)
            out.push_back({r, {k, desk_depth(k)}});
    return out;
}

std::vector<BenchInstance> large_suite() {
    std::vector<BenchInstance> out;
    for (Recursion r : {Recursion::Left, Recursion::Right})
        for (GraphKind k : kSuiteKinds)
            out.push_back({r, {k, large_depth(k)}});
    return out;
}

} // namespace tabling::bench
