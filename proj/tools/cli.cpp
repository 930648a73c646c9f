#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include "sgm/config.hpp"
#include "sgm/gradcheck.hpp"
#include "sgm/harness.hpp"
#include "sgm/oracle.hpp"
#include "sgm/policies.hpp"
#include "sgm/problem.hpp"
#include "sgm/sampler.hpp"
#include "sgm/trainer.hpp"
#include "sgm/verify.hpp"

namespace sgm {

namespace {

struct CommonOpts {
    std::string config_path;
    std::vector<std::string> overrides;
};

void add_config_flags(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "key = value configuration file");
    cmd->add_option("--set", opts.overrides, "override a config key (key=value, repeatable)");
}

Config resolve_config(const CommonOpts& opts) {
    Config cfg = opts.config_path.empty() ? Config::from_text("", opts.overrides)
                                          : Config::from_file(opts.config_path, opts.overrides);
    std::istringstream echo(cfg.echo());
    std::string line;
    while (std::getline(echo, line)) std::cerr << "# " << line << '\n';
    return cfg;
}

SearchBudget make_budget(const Config& cfg, double time_limit, std::size_t step_limit,
                         std::size_t solution_cap) {
    SearchBudget b = cfg.search;
    b.wall_seconds = time_limit;
    b.max_steps = step_limit;
    b.solution_cap = solution_cap == 0 ? kUnlimited : solution_cap;
    return b;
}

std::shared_ptr<const LabeledGraph> load_target(const std::string& path) {
    return std::make_shared<const LabeledGraph>(load_graph(path));
}

std::unique_ptr<PolicyModel> maybe_load_model(const std::string& path) {
    if (path.empty()) return nullptr;
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open model checkpoint: " + path);
    return std::make_unique<PolicyModel>(PolicyModel::load(f));
}

// Deterministic Erdos-Renyi-style graph used by gradcheck's self-contained
// scenario.
LabeledGraph random_graph(std::size_t n, double avg_deg, int num_labels, std::uint64_t seed) {
    Rng rng(seed);
    double p = std::min(1.0, avg_deg / static_cast<double>(n - 1));
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId a = 0; a < n; ++a)
        for (NodeId b = a + 1; b < n; ++b)
            if (rng.next_double() < p) edges.emplace_back(a, b);
    std::vector<Label> labels(n);
    for (auto& l : labels) l = static_cast<Label>(rng.below(num_labels));
    return LabeledGraph::from_edges(n, std::move(labels), edges);
}

int cmd_sample(const std::string& target_path, std::size_t size, std::size_t count,
               std::uint64_t seed, const std::string& out_dir, double p_override) {
    auto target = load_target(target_path);
    std::filesystem::create_directories(out_dir);
    for (std::size_t i = 1; i <= count; ++i) {
        double p = p_override > 0 ? p_override : (count >= 2 ? p_schedule(i, count) : 1.0);
        SampledQuery sq = random_walk_sample(*target, size, p, Rng::mix(seed, i));
        char name[32];
        std::snprintf(name, sizeof name, "q_%03zu", i);
        std::filesystem::path base = std::filesystem::path(out_dir) / name;
        save_graph(base.string() + ".graph", sq.query);
        save_mapping(base.string() + ".map", sq.truth_mapping);
        std::cout << base.string() << ".graph p=" << p << " nodes=" << sq.query.num_nodes()
                  << " edges=" << sq.query.num_edges() << '\n';
    }
    return 0;
}

int cmd_solve(const std::string& query_path, const std::string& target_path,
              const std::string& policy_name, const std::string& model_path, std::uint64_t seed,
              double time_limit, std::size_t step_limit, std::size_t solution_cap,
              const CommonOpts& common) {
    Config cfg = resolve_config(common);
    auto target = load_target(target_path);
    SearchProblem problem = SearchProblem::build(target, load_graph(query_path));

    auto model = maybe_load_model(model_path);
    std::unique_ptr<Policy> policy;
    switch (policy_kind_from_string(policy_name)) {
        case PolicyKind::random: policy = std::make_unique<RandomPolicy>(seed); break;
        case PolicyKind::degree: policy = std::make_unique<DegreePolicy>(); break;
        case PolicyKind::neural:
            if (!model) throw std::runtime_error("--policy neural requires --model");
            policy = std::make_unique<NeuralPolicy>(*model);
            break;
    }
    SearchBudget budget = make_budget(cfg, time_limit, step_limit, solution_cap);
    auto outcome = backtracking_search(problem.query, *problem.target, problem.candidates,
                                       problem.order, *policy, budget);
    std::cout << format_search_output(outcome, budget.wall_seconds == 0);
    return 0;
}

int cmd_oracle(const std::string& query_path, const std::string& target_path) {
    LabeledGraph query = load_graph(query_path);
    LabeledGraph target = load_graph(target_path);
    auto matches = brute_force_oracle(query, target);
    std::cout << matches.size() << '\n';
    return 0;
}

int cmd_train(const std::string& target_path, std::size_t iters, std::uint64_t seed,
              const std::string& out_path, const std::string& log_path,
              const CommonOpts& common) {
    Config cfg = resolve_config(common);
    if (seed != 0) cfg.trainer.seed = seed;
    auto target = load_target(target_path);
    PolicyModel model(cfg.encoder, cfg.trainer.seed);
    Trainer trainer(target, model, cfg.trainer);
    trainer.build_validation_set();
    for (std::size_t i = 0; i < iters; ++i) {
        auto rep = trainer.run_iteration();
        std::cerr << "iter " << rep.iter << " samples=" << rep.samples_collected
                  << " solutions=" << rep.solutions_found << " buffer=" << rep.buffer_size
                  << " loss=" << rep.loss_total;
        if (rep.val_reward)
            std::cerr << " val=" << *rep.val_reward
                      << (rep.accepted && *rep.accepted ? " accepted" : " reverted");
        std::cerr << '\n';
    }
    model.params().restore_values(trainer.best().values);
    if (!out_path.empty()) {
        std::ofstream f(out_path);
        if (!f) throw std::runtime_error("cannot write model checkpoint: " + out_path);
        model.save(f);
    }
    if (!log_path.empty()) {
        std::ofstream f(log_path);
        if (!f) throw std::runtime_error("cannot write training log: " + log_path);
        Trainer::write_log_csv(f, trainer.history());
    }
    std::cerr << "best validation reward " << trainer.best().reward << " at iteration "
              << trainer.best().iteration << '\n';
    return 0;
}

int cmd_eval(const std::string& query_dir, const std::string& target_path,
             const std::string& policy_name, const std::string& model_path, std::uint64_t seed,
             double time_limit, std::size_t step_limit, std::size_t solution_cap,
             std::size_t threads, const std::string& out_path, const CommonOpts& common) {
    Config cfg = resolve_config(common);
    auto target = load_target(target_path);
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(query_dir))
        if (e.path().extension() == ".graph") files.push_back(e.path());
    std::sort(files.begin(), files.end());

    auto model = maybe_load_model(model_path);
    EvalOptions opts;
    opts.policy = policy_kind_from_string(policy_name);
    opts.model = model.get();
    if (opts.policy == PolicyKind::neural && !model)
        throw std::runtime_error("--policy neural requires --model");
    opts.budget = make_budget(cfg, time_limit, step_limit, solution_cap);
    opts.seed = seed;
    opts.threads = threads;

    auto records = run_eval_harness(files, *target, opts);
    std::string csv = emit_eval_csv(records);
    if (out_path.empty()) {
        std::cout << csv;
    } else {
        std::ofstream f(out_path);
        if (!f) throw std::runtime_error("cannot write records: " + out_path);
        f << csv;
    }
    return 0;
}

int cmd_gradcheck(std::uint64_t seed, double h, std::size_t coords) {
    // Self-contained scenario: a sampled query over a small random target,
    // signals from a capped search, both loss terms over two samples.
    LabeledGraph target_g = random_graph(24, 4.0, 3, Rng::mix(seed, 11));
    auto target = std::make_shared<const LabeledGraph>(std::move(target_g));
    SampledQuery sq = random_walk_sample(*target, 5, 1.0, Rng::mix(seed, 13));
    auto problem = std::make_shared<SearchProblem>(SearchProblem::build(target, sq.query));

    RandomPolicy policy(Rng::mix(seed, 17));
    SearchBudget budget;
    budget.max_steps = 4000;
    budget.solution_cap = 4;
    auto outcome = backtracking_search(problem->query, *problem->target, problem->candidates,
                                       problem->order, policy, budget, true);
    auto samples = collect_training_signals(*outcome.tree, problem);
    if (samples.empty()) throw std::runtime_error("gradcheck scenario produced no samples");
    std::sort(samples.begin(), samples.end(), [](const auto& a, const auto& b) {
        return a.positives.size() > b.positives.size();
    });
    samples.resize(std::min<std::size_t>(samples.size(), 2));
    for (auto& s : samples) sample_negatives(s, Rng::mix(seed, 19));

    EncoderConfig enc;
    enc.layers = 2;
    enc.dim = 8;
    enc.proj_dim = 8;
    enc.attention_mlp = {8, 4, 1};
    enc.policy_mlp = {enc.bilinear_slices + 8, 16, 8, 1};
    PolicyModel model(enc, Rng::mix(seed, 23));

    auto build = [&](Tape& tape) {
        ValueId sum = 0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            LossTerms t = total_loss(tape, model, samples[i]);
            sum = i == 0 ? t.total : tape.add(sum, t.total);
        }
        return sum;
    };
    auto report = finite_difference_check(model.params(), build, h, coords, seed);
    std::cout << "max_rel_error " << report.max_rel_error << " over " << report.coords_checked
              << " coordinates\n";
    return report.max_rel_error < 1e-4 ? 0 : 1;
}

int cmd_curves(const std::string& records_path, double bucket, const std::string& out_path) {
    std::ifstream f(records_path);
    if (!f) throw std::runtime_error("cannot open records: " + records_path);
    auto records = parse_eval_csv(f);
    auto pts = aggregate_curves(records, bucket);
    std::string csv = emit_curves_csv(pts);
    if (out_path.empty()) {
        std::cout << csv;
    } else {
        std::ofstream o(out_path);
        if (!o) throw std::runtime_error("cannot write curves: " + out_path);
        o << csv;
    }
    return 0;
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv) {
    CLI::App app{"subgraph matching engine with learned target-node ordering"};
    app.require_subcommand(1);

    std::string target_path, query_path, query_dir, policy_name = "random", model_path;
    std::string out_path, log_path, records_path;
    std::uint64_t seed = 0;
    std::size_t size = 16, count = 1, iters = 50, step_limit = 0, solution_cap = 0, threads = 1;
    std::size_t fd_coords = 200;
    double time_limit = 0, p_override = 0, bucket = 1.0, fd_h = 1e-5;
    CommonOpts common;

    auto* sample = app.add_subcommand("sample", "sample ground-truth queries from a target graph");
    sample->add_option("--target", target_path)->required();
    sample->add_option("--size", size, "query node count");
    sample->add_option("--count", count, "number of queries (sweeps p when > 1)");
    sample->add_option("--seed", seed);
    sample->add_option("--out-dir", out_path)->required();
    sample->add_option("--p", p_override, "fixed walk parameter instead of the sweep");

    auto* solve = app.add_subcommand("solve", "find matches of one query in a target");
    solve->add_option("--query", query_path)->required();
    solve->add_option("--target", target_path)->required();
    solve->add_option("--policy", policy_name, "random | degree | neural");
    solve->add_option("--model", model_path);
    solve->add_option("--seed", seed);
    solve->add_option("--time-limit", time_limit, "seconds; 0 = unlimited");
    solve->add_option("--step-limit", step_limit, "recursive calls; 0 = unlimited");
    solve->add_option("--solution-cap", solution_cap, "stop after N matches; 0 = all");
    add_config_flags(solve, common);

    auto* train = app.add_subcommand("train", "train the ordering policy on one target graph");
    train->add_option("--target", target_path)->required();
    train->add_option("--iters", iters);
    train->add_option("--seed", seed);
    train->add_option("--out", out_path, "model checkpoint to write");
    train->add_option("--log", log_path, "training CSV log");
    add_config_flags(train, common);

    auto* eval = app.add_subcommand("eval", "run a query directory against a target");
    eval->add_option("--queries", query_dir)->required();
    eval->add_option("--target", target_path)->required();
    eval->add_option("--policy", policy_name);
    eval->add_option("--model", model_path);
    eval->add_option("--seed", seed);
    eval->add_option("--time-limit", time_limit);
    eval->add_option("--step-limit", step_limit);
    eval->add_option("--solution-cap", solution_cap);
    eval->add_option("--threads", threads);
    eval->add_option("--out", out_path, "records CSV (stdout when omitted)");
    add_config_flags(eval, common);

    auto* oracle = app.add_subcommand("oracle", "exhaustive reference match count");
    oracle->add_option("--query", query_path)->required();
    oracle->add_option("--target", target_path)->required();

    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient check");
    gradcheck->add_option("--seed", seed);
    gradcheck->add_option("--fd-step", fd_h, "central-difference step");
    gradcheck->add_option("--coords", fd_coords, "minimum coordinates to probe");

    auto* curves = app.add_subcommand("curves", "cumulative solved-over-time from records");
    curves->add_option("--records", records_path)->required();
    curves->add_option("--bucket", bucket, "bucket width in seconds");
    curves->add_option("--out", out_path);

    try {
        app.parse(argc, const_cast<char**>(argv));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (sample->parsed())
            return cmd_sample(target_path, size, count, seed, out_path, p_override);
        if (solve->parsed())
            return cmd_solve(query_path, target_path, policy_name, model_path, seed, time_limit,
                             step_limit, solution_cap, common);
        if (train->parsed()) return cmd_train(target_path, iters, seed, out_path, log_path, common);
        if (eval->parsed())
            return cmd_eval(query_dir, target_path, policy_name, model_path, seed, time_limit,
                            step_limit, solution_cap, threads, out_path, common);
        if (oracle->parsed()) return cmd_oracle(query_path, target_path);
        if (gradcheck->parsed()) return cmd_gradcheck(seed, fd_h, fd_coords);
        if (curves->parsed()) return cmd_curves(records_path, bucket, out_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace sgm
