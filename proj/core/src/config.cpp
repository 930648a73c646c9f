#include "sgm/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace sgm {

namespace {

std::size_t parse_size(const std::string& v, std::size_t line, const std::string& key) {
    try {
        std::size_t pos = 0;
        unsigned long long x = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return static_cast<std::size_t>(x);
    } catch (...) {
        throw ConfigError(line, "expected a nonnegative integer for '" + key + "', got '" + v + "'");
    }
}

double parse_real(const std::string& v, std::size_t line, const std::string& key) {
    try {
        std::size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        throw ConfigError(line, "expected a real number for '" + key + "', got '" + v + "'");
    }
}

bool parse_bool(const std::string& v, std::size_t line, const std::string& key) {
    if (v == "1" || v == "true" || v == "on") return true;
    if (v == "0" || v == "false" || v == "off") return false;
    throw ConfigError(line, "expected a boolean for '" + key + "', got '" + v + "'");
}

std::vector<std::size_t> parse_sizes(const std::string& v, std::size_t line,
                                     const std::string& key) {
    std::vector<std::size_t> out;
    std::istringstream ss(v);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(parse_size(tok, line, key));
    if (out.empty()) throw ConfigError(line, "expected a size list for '" + key + "'");
    return out;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

}  // namespace

void Config::apply(const std::string& key, const std::string& value, std::size_t line) {
    if (key == "K") encoder.layers = parse_size(value, line, key);
    else if (key == "D") {
        encoder.dim = parse_size(value, line, key);
        encoder.attention_mlp.front() = encoder.dim;
        encoder.policy_mlp.front() = encoder.bilinear_slices + encoder.dim;
        encoder.proj_dim = encoder.dim;
    } else if (key == "F") {
        encoder.bilinear_slices = parse_size(value, line, key);
        encoder.policy_mlp.front() = encoder.bilinear_slices + encoder.dim;
    } else if (key == "attention_mlp") {
        encoder.attention_mlp = parse_sizes(value, line, key);
    } else if (key == "policy_mlp") {
        encoder.policy_mlp = parse_sizes(value, line, key);
    } else if (key == "use_ldp") encoder.use_ldp = parse_bool(value, line, key);
    else if (key == "query_readout_concat")
        encoder.query_readout_concat = parse_bool(value, line, key);
    else if (key == "lr") trainer.opt.lr = parse_real(value, line, key);
    else if (key == "eps") trainer.opt.eps = parse_real(value, line, key);
    else if (key == "beta1") trainer.opt.beta1 = parse_real(value, line, key);
    else if (key == "beta2") trainer.opt.beta2 = parse_real(value, line, key);
    else if (key == "weight_decay") trainer.opt.weight_decay = parse_real(value, line, key);
    else if (key == "clip_norm") trainer.opt.clip_norm = parse_real(value, line, key);
    else if (key == "margin") trainer.margin = parse_real(value, line, key);
    else if (key == "batch_size") trainer.batch_size = parse_size(value, line, key);
    else if (key == "buffer_capacity") trainer.buffer_capacity = parse_size(value, line, key);
    else if (key == "batches_per_iteration")
        trainer.batches_per_iteration = parse_size(value, line, key);
    else if (key == "search_step_limit") trainer.search_step_limit = parse_size(value, line, key);
    else if (key == "search_solution_cap")
        trainer.search_solution_cap = parse_size(value, line, key);
    else if (key == "val_step_limit") trainer.val_step_limit = parse_size(value, line, key);
    else if (key == "validate_every") trainer.validate_every = parse_size(value, line, key);
    else if (key == "curriculum") trainer.curriculum = parse_sizes(value, line, key);
    else if (key == "seed") trainer.seed = parse_size(value, line, key);
    else if (key == "restart_threshold") search.restart_threshold = parse_size(value, line, key);
    else if (key == "restart_budget") search.restart_budget = parse_size(value, line, key);
    else if (key == "restarts") search.enable_restarts = parse_bool(value, line, key);
    else if (key == "promise_minimize") search.promise_minimize = parse_bool(value, line, key);
    else throw ConfigError(line, "unknown key '" + key + "'");
}

const std::vector<std::string>& Config::known_keys() {
    static const std::vector<std::string> keys = {
        "K", "D", "F", "attention_mlp", "policy_mlp", "use_ldp", "query_readout_concat",
        "lr", "eps", "beta1", "beta2", "weight_decay", "clip_norm", "margin", "batch_size",
        "buffer_capacity", "batches_per_iteration", "search_step_limit", "search_solution_cap",
        "val_step_limit", "validate_every", "curriculum", "seed", "restart_threshold",
        "restart_budget", "restarts", "promise_minimize"};
    return keys;
}

Config Config::from_text(const std::string& text, const std::vector<std::string>& cli_overrides) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(line_no, "expected 'key = value', got '" + t + "'");
        cfg.apply(trim(t.substr(0, eq)), trim(t.substr(eq + 1)), line_no);
    }
    for (const auto& ov : cli_overrides) {
        auto eq = ov.find('=');
        if (eq == std::string::npos)
            throw ConfigError(0, "override must be key=value, got '" + ov + "'");
        cfg.apply(trim(ov.substr(0, eq)), trim(ov.substr(eq + 1)), 0);
    }
    cfg.encoder.validate();
    return cfg;
}

Config Config::from_file(const std::filesystem::path& path,
                         const std::vector<std::string>& cli_overrides) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config file: " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return from_text(ss.str(), cli_overrides);
}

std::string Config::echo() const {
    std::ostringstream o;
    auto sizes = [](const std::vector<std::size_t>& v) {
        std::ostringstream s;
        for (std::size_t i = 0; i < v.size(); ++i) s << (i ? "," : "") << v[i];
        return s.str();
    };
    o << "K = " << encoder.layers << '\n'
      << "D = " << encoder.dim << '\n'
      << "F = " << encoder.bilinear_slices << '\n'
      << "attention_mlp = " << sizes(encoder.attention_mlp) << '\n'
      << "policy_mlp = " << sizes(encoder.policy_mlp) << '\n'
      << "use_ldp = " << encoder.use_ldp << '\n'
      << "query_readout_concat = " << encoder.query_readout_concat << '\n'
      << "lr = " << trainer.opt.lr << '\n'
      << "eps = " << trainer.opt.eps << '\n'
      << "beta1 = " << trainer.opt.beta1 << '\n'
      << "beta2 = " << trainer.opt.beta2 << '\n'
      << "weight_decay = " << trainer.opt.weight_decay << '\n'
      << "clip_norm = " << trainer.opt.clip_norm << '\n'
      << "margin = " << trainer.margin << '\n'
      << "batch_size = " << trainer.batch_size << '\n'
      << "buffer_capacity = " << trainer.buffer_capacity << '\n'
      << "batches_per_iteration = " << trainer.batches_per_iteration << '\n'
      << "search_step_limit = " << trainer.search_step_limit << '\n'
      << "search_solution_cap = " << trainer.search_solution_cap << '\n'
      << "val_step_limit = " << trainer.val_step_limit << '\n'
      << "validate_every = " << trainer.validate_every << '\n'
      << "curriculum = " << sizes(trainer.curriculum) << '\n'
      << "seed = " << trainer.seed << '\n'
      << "restart_threshold = " << search.restart_threshold << '\n'
      << "restart_budget = " << search.restart_budget << '\n'
      << "restarts = " << search.enable_restarts << '\n'
      << "promise_minimize = " << search.promise_minimize << '\n';
    return o.str();
}

}  // namespace sgm
