#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "randpol/driver.hpp"
#include "randpol/envs.hpp"

namespace randpol::harness {

struct EnvSpec {
    /// synthetic_1d | linear_quadratic
    std::string name = "synthetic_1d";
    /// Empty means the environment default (0.7 synthetic, 0.9 LQ).
    std::optional<double> gamma;
    double u_max = 1.0;
    double dt = 0.1;
    LqOptions lq;
};

struct ExperimentConfig {
    EnvSpec env;
    RandpolConfig randpol;
    std::vector<std::uint64_t> seeds{1};
    std::filesystem::path out_dir = "randpol_out";
    bool svg = true;
    /// Fill the wall_ms column. Off by default so reruns are byte-identical.
    bool timing = false;

    void validate() const;
};

class ConfigError : public std::runtime_error {
public:
    enum class Kind { missing_file, parse, validation };

    ConfigError(Kind kind, std::string field, const std::string& message);

    Kind kind() const { return kind_; }
    const std::string& field() const { return field_; }

private:
    Kind kind_;
    std::string field_;
};

/// Parse `key = value` lines; '#' starts a comment. `source` names the input in messages.
ExperimentConfig parse_config(std::string_view text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Every key with its effective value, in the same grammar; parse_config
/// of this text gives back an equal configuration.
std::string resolved_config_text(const ExperimentConfig& cfg);

/// (key, default, description) for every recognised key.
struct KeyDoc {
    std::string key;
    std::string default_value;
    std::string description;
};
const std::vector<KeyDoc>& config_keys();

EnvModel make_env(const EnvSpec& spec);

/// "1,2,3" -> {1,2,3}; throws ConfigError on bad entries.
std::vector<std::uint64_t> parse_seed_list(std::string_view text, const std::string& field = "seeds");

}  // namespace randpol::harness
