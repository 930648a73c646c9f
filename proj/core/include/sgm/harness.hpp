#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "sgm/model.hpp"
#include "sgm/search.hpp"

namespace sgm {

enum class PolicyKind { random, degree, neural };

PolicyKind policy_kind_from_string(const std::string& s);
std::string to_string(PolicyKind k);

/// One evaluated (query, target) pair. Under a wall-clock budget first_ms is
/// measured time; under a pure step budget it is a deterministic virtual time
/// equal to the step count at the first solution, so seeded runs are
/// byte-identical.
struct EvalRecord {
    std::string pair_id;
    std::string query_file;
    std::string policy;
    bool solved = false;
    double first_ms = -1;  // present (>= 0) iff solved
    std::size_t num_solutions = 0;
    std::size_t steps = 0;
};

struct EvalOptions {
    PolicyKind policy = PolicyKind::random;
    PolicyModel* model = nullptr;  // required for the neural policy
    SearchBudget budget;           // wall_seconds == 0 selects virtual time
    std::uint64_t seed = 0;
    std::size_t threads = 1;
};

/// Filter -> order -> search for every query file against one target.
/// Per-pair failures are reported on stderr and yield an unsolved record;
/// they never suppress other pairs. Records come back in pair-id order
/// regardless of worker scheduling.
std::vector<EvalRecord> run_eval_harness(const std::vector<std::filesystem::path>& query_files,
                                         const LabeledGraph& target, const EvalOptions& options);

/// `pair_id,query_file,policy,solved,first_ms,num_solutions,steps`
std::string emit_eval_csv(const std::vector<EvalRecord>& records);
std::vector<EvalRecord> parse_eval_csv(std::istream& in);

/// Cumulative solved count over time: value at t = k*bucket counts the pairs
/// whose first solution landed at or before that edge. Nondecreasing.
struct CurvePoint {
    double t_seconds = 0;
    std::size_t solved_cumulative = 0;
};

std::vector<CurvePoint> aggregate_curves(const std::vector<EvalRecord>& records,
                                         double bucket_seconds);

/// `t_seconds,solved_cumulative`
std::string emit_curves_csv(const std::vector<CurvePoint>& points);

}  // namespace sgm
