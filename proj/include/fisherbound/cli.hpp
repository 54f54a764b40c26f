#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace fisherbound::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitBudgetExceeded = 3;

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string command;
    std::string scheme = "entangled-pauli";
    int n = 1;
    // Classical dimension: multinomial free parameters, Gaussian dimension.
    int d = 2;
    std::string theta_preset = "default";  // default, depolarizing, identity, random
    std::vector<double> theta;             // explicit point, wins over the preset
    uint64_t theta_seed = 1;
    std::string probe_preset = "uniform";  // uniform, z
    std::vector<std::vector<double>> probe;  // per-qubit Bloch vectors (rx, ry, rz)
    double epsilon = 0.1;
    double delta = 0.1;
    std::string norm = "linf";
    uint64_t trials = 2000;
    uint64_t seed = 2026;
    uint64_t m_max = uint64_t{1} << 22;
    uint64_t resolution = 1;
    double be_constant = 0.4748;
    int grid_size = 0;
    int truncation = 20;
    int n_min = 1;
    int n_max = 8;
    int simulate_n_max = 0;
    std::string out;
    std::string format = "csv";
};

// Every key, including defaults, except `out`.
nlohmann::json config_to_json(const RunConfig &c);
// Strict: unknown keys and wrong types throw ConfigError. `text` is used for line numbers.
RunConfig config_from_json(const nlohmann::json &j, const std::string &text = "");
// Accepts a config file, a JSON report or a CSV report (the embedded config is used).
RunConfig load_config(const std::string &path);
// Range and consistency checks that do not need a model.
void validate(const RunConfig &c);

using Cell = std::variant<double, int64_t, bool, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

std::string format_number(double v);
std::string to_csv(const Table &t, const RunConfig &c);
std::string to_json(const Table &t, const RunConfig &c);

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);
int run(int argc, char **argv, std::ostream &out, std::ostream &err);

}  // namespace fisherbound::cli
