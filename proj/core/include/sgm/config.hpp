#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "sgm/model.hpp"
#include "sgm/search.hpp"
#include "sgm/trainer.hpp"

namespace sgm {

struct ConfigError : std::runtime_error {
    ConfigError(std::size_t line_, const std::string& what_)
        : std::runtime_error((line_ ? "line " + std::to_string(line_) + ": " : "") + what_),
          line(line_) {}
    std::size_t line;
};

/// Every tunable in one place. Defaults are the shipped hyperparameters
/// (K=8, D=16, F=32, lr=0.0005, eps=0.01, clip 0.1, buffer 128, ...).
struct Config {
    EncoderConfig encoder;
    TrainerConfig trainer;
    SearchBudget search;

    /// Line-oriented `key = value` text; later lines win. Unknown keys and
    /// type mismatches are errors carrying the line number.
    static Config from_file(const std::filesystem::path& path,
                            const std::vector<std::string>& cli_overrides = {});
    static Config from_text(const std::string& text,
                            const std::vector<std::string>& cli_overrides = {});

    void apply(const std::string& key, const std::string& value, std::size_t line = 0);

    /// Resolved configuration as `key = value` lines, for reproducibility logs.
    std::string echo() const;

    static const std::vector<std::string>& known_keys();
};

}  // namespace sgm
