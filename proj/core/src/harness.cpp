#include "sgm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <sstream>
#include <thread>

#include "sgm/policies.hpp"
#include "sgm/problem.hpp"
#include "sgm/rng.hpp"

namespace sgm {

PolicyKind policy_kind_from_string(const std::string& s) {
    if (s == "random") return PolicyKind::random;
    if (s == "degree") return PolicyKind::degree;
    if (s == "neural") return PolicyKind::neural;
    throw std::invalid_argument("unknown policy: " + s);
}

std::string to_string(PolicyKind k) {
    switch (k) {
        case PolicyKind::random: return "random";
        case PolicyKind::degree: return "degree";
        case PolicyKind::neural: return "neural";
    }
    return "?";
}

namespace {

EvalRecord eval_one(const std::filesystem::path& query_file, std::size_t pair_index,
                    const LabeledGraph& target, const EvalOptions& options) {
    EvalRecord rec;
    rec.pair_id = std::to_string(pair_index);
    rec.query_file = query_file.string();
    rec.policy = to_string(options.policy);
    try {
        LabeledGraph query = load_graph(query_file);
        auto target_ref = std::shared_ptr<const LabeledGraph>(&target, [](const LabeledGraph*) {});
        SearchProblem problem = SearchProblem::build(target_ref, std::move(query));

        std::unique_ptr<Policy> policy;
        switch (options.policy) {
            case PolicyKind::random:
                policy = std::make_unique<RandomPolicy>(Rng::mix(options.seed, pair_index));
                break;
            case PolicyKind::degree:
                policy = std::make_unique<DegreePolicy>();
                break;
            case PolicyKind::neural:
                if (!options.model) throw std::runtime_error("neural policy requires a model");
                policy = std::make_unique<NeuralPolicy>(*options.model);
                break;
        }
        auto outcome = backtracking_search(problem.query, *problem.target, problem.candidates,
                                           problem.order, *policy, options.budget);
        rec.solved = outcome.solved();
        rec.num_solutions = outcome.matches.size();
        rec.steps = outcome.steps;
        if (rec.solved) {
            bool virtual_time = options.budget.wall_seconds == 0;
            rec.first_ms = virtual_time ? static_cast<double>(outcome.first_solution_steps)
                                        : outcome.first_solution_ms;
        }
    } catch (const std::exception& e) {
        std::cerr << "eval: pair " << rec.pair_id << " (" << rec.query_file << ") failed: "
                  << e.what() << '\n';
        rec.solved = false;
        rec.num_solutions = 0;
    }
    return rec;
}

}  // namespace

std::vector<EvalRecord> run_eval_harness(const std::vector<std::filesystem::path>& query_files,
                                         const LabeledGraph& target, const EvalOptions& options) {
    std::vector<EvalRecord> records(query_files.size());
    std::size_t workers = std::max<std::size_t>(1, options.threads);
    workers = std::min(workers, query_files.size() ? query_files.size() : std::size_t{1});

    if (workers <= 1) {
        for (std::size_t i = 0; i < query_files.size(); ++i)
            records[i] = eval_one(query_files[i], i, target, options);
        return records;
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= query_files.size()) return;
            records[i] = eval_one(query_files[i], i, target, options);
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return records;
}

std::string emit_eval_csv(const std::vector<EvalRecord>& records) {
    std::ostringstream out;
    out << "pair_id,query_file,policy,solved,first_ms,num_solutions,steps\n";
    for (const auto& r : records) {
        out << r.pair_id << ',' << r.query_file << ',' << r.policy << ',' << (r.solved ? 1 : 0)
            << ',';
        if (r.solved) out << r.first_ms;
        out << ',' << r.num_solutions << ',' << r.steps << '\n';
    }
    return out.str();
}

std::vector<EvalRecord> parse_eval_csv(std::istream& in) {
    std::vector<EvalRecord> out;
    std::string line;
    if (!std::getline(in, line)) return out;
    if (line != "pair_id,query_file,policy,solved,first_ms,num_solutions,steps")
        throw std::runtime_error("eval csv: unexpected header: " + line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::string cur;
        for (char c : line) {
            if (c == ',') {
                f.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        f.push_back(cur);
        if (f.size() != 7) throw std::runtime_error("eval csv: bad row: " + line);
        EvalRecord r;
        r.pair_id = f[0];
        r.query_file = f[1];
        r.policy = f[2];
        r.solved = f[3] == "1";
        r.first_ms = f[4].empty() ? -1 : std::stod(f[4]);
        r.num_solutions = std::stoull(f[5]);
        r.steps = std::stoull(f[6]);
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<CurvePoint> aggregate_curves(const std::vector<EvalRecord>& records,
                                         double bucket_seconds) {
    if (bucket_seconds <= 0) throw std::invalid_argument("bucket must be positive");
    std::vector<double> times;
    for (const auto& r : records)
        if (r.solved && r.first_ms >= 0) times.push_back(r.first_ms / 1000.0);
    std::sort(times.begin(), times.end());

    std::vector<CurvePoint> out;
    if (times.empty()) {
        out.push_back(CurvePoint{bucket_seconds, 0});
        return out;
    }
    double horizon = times.back();
    std::size_t buckets = static_cast<std::size_t>(std::ceil(horizon / bucket_seconds));
    if (buckets * bucket_seconds < horizon) ++buckets;
    std::size_t idx = 0;
    for (std::size_t k = 1; k <= buckets + 1; ++k) {
        double edge = static_cast<double>(k) * bucket_seconds;
        while (idx < times.size() && times[idx] <= edge) ++idx;
        out.push_back(CurvePoint{edge, idx});
    }
    return out;
}

std::string emit_curves_csv(const std::vector<CurvePoint>& points) {
    std::ostringstream out;
    out << "t_seconds,solved_cumulative\n";
    for (const auto& p : points) out << p.t_seconds << ',' << p.solved_cumulative << '\n';
    return out.str();
}

}  // namespace sgm
