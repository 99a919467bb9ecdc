#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tabling/program.hpp"
#include "tabling/term.hpp"

namespace tabling::bench {

// Triangle is the full triangular lattice; it grows as depth^4 in answers and
// is kept for small experiments only.
enum class GraphKind { BTree, Pyramid, Cycle, Grid, Triangle };
enum class Recursion { Left, Right };

std::string to_string(GraphKind k);
std::string to_string(Recursion r);

struct EdgeConfig {
    GraphKind kind = GraphKind::Cycle;
    std::uint32_t depth = 1;
};

struct BenchInstance {
    Recursion recursion = Recursion::Left;
    EdgeConfig config;
};

// Raised for malformed bench specs and for depths over the desk cap.
class BenchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Largest depth accepted without the paper-scale override.
std::uint32_t desk_cap(GraphKind k);
std::uint32_t desk_depth(GraphKind k);
std::uint32_t large_depth(GraphKind k);

// Deterministic edge/2 facts with positive integer node ids.
// Throws BenchError for depth 0 or depth above desk_cap unless allow_large.
std::vector<Term> gen_edges(const EdgeConfig& c, bool allow_large = false);

// Node count of the generated graph.
std::uint64_t node_count(const EdgeConfig& c);

// The two-clause path/2 definition plus the edge facts; path/2 is tabled.
Program make_program(const BenchInstance& b, bool allow_large = false);

// path(V0,V1)
Term default_query();

// "pathleft:cycle:100" -> instance. Throws BenchError.
BenchInstance parse_bench_spec(std::string_view spec);
std::string bench_name(const BenchInstance& b);

// The eight desk-scale instances {Left,Right} x {BTree,Pyramid,Cycle,Grid}.
std::vector<BenchInstance> desk_suite();
std::vector<BenchInstance> large_suite();

} // namespace tabling::bench
