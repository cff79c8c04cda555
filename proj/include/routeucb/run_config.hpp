#pragma once
// Flat key=value run configuration with dotted keys. One schema drives
// parsing, validation, flag mirroring, and the resolved snapshot that a run
// writes next to its metrics; re-running from a snapshot reproduces the run
// byte for byte. Defaults marked paper-unspecified in the snapshot are the
// values the published setup leaves open.

#include "routeucb/dataset.hpp"
#include "routeucb/protocol.hpp"
#include "routeucb/synthetic.hpp"
#include "routeucb/textio.hpp"

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace routeucb {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string dataset_path;     // empty -> use the synthetic block
    std::uint64_t synthetic_seed = 1;
    int synthetic_n = 0;          // 0 -> synthetic block not in use
    int synthetic_k = 5;
    int synthetic_d = 8;
    int synthetic_e = 16;
    std::string policy_kind = "neural_ucb";
    double reward_lambda = 1.0;
    double ucb_beta = 1.0;
    double ucb_lambda0 = 1.0;
    double ucb_tau_g = 0.5;
    double net_lr = 1e-3;
    int net_batch_size = 256;
    double net_huber_delta = 1.0;
    double net_gate_loss_weight = 1.0;
    double net_gate_margin = 0.05;
    int protocol_slices = 20;
    int protocol_epochs = 5;
    std::uint64_t protocol_seed = 1;
    std::string protocol_warmstart = "uniform_random_first_slice";
    std::string out_dir; // empty -> derived from the output root and run identity
};

namespace cfgdetail {

enum class KeyType { string_v, int_v, uint_v, double_v };

struct KeySpec {
    const char* key;
    KeyType type;
    bool paper_unspecified;
    const char* help;
};

// Declaration order is also the snapshot order.
inline const std::vector<KeySpec>& schema() {
    static const std::vector<KeySpec> s = {
        {"dataset.path", KeyType::string_v, false, "dataset file; empty uses the synthetic block"},
        {"synthetic.seed", KeyType::uint_v, false, "generator seed"},
        {"synthetic.n", KeyType::int_v, false, "synthetic sample count; 0 disables the block"},
        {"synthetic.k", KeyType::int_v, false, "synthetic action count"},
        {"synthetic.d", KeyType::int_v, false, "synthetic domain count"},
        {"synthetic.e", KeyType::int_v, false, "synthetic embedding width"},
        {"policy.kind", KeyType::string_v, false,
         "neural_ucb|random|min_cost|max_quality|binary_router"},
        {"reward.lambda", KeyType::double_v, true, "cost aversion in the utility reward"},
        {"ucb.beta", KeyType::double_v, false, "exploration bonus coefficient"},
        {"ucb.lambda0", KeyType::double_v, false, "ridge initializer of the covariance"},
        {"ucb.tau_g", KeyType::double_v, true, "gate threshold for the UCB branch"},
        {"net.lr", KeyType::double_v, false, "optimizer learning rate"},
        {"net.batch_size", KeyType::int_v, true, "replay minibatch size"},
        {"net.huber_delta", KeyType::double_v, true, "Huber transition point"},
        {"net.gate_loss_weight", KeyType::double_v, true, "weight of the gate BCE term"},
        {"net.gate_margin", KeyType::double_v, true, "overconfidence margin for gate labels"},
        {"protocol.slices", KeyType::int_v, false, "number of stream slices"},
        {"protocol.epochs", KeyType::int_v, false, "replay epochs per slice"},
        {"protocol.seed", KeyType::uint_v, true, "master run seed"},
        {"protocol.warmstart", KeyType::string_v, true, "uniform_random_first_slice|none"},
        {"out.dir", KeyType::string_v, false, "output directory; empty derives one"},
    };
    return s;
}

inline const KeySpec* find_key(const std::string& key) {
    for (const KeySpec& ks : schema())
        if (key == ks.key) return &ks;
    return nullptr;
}

} // namespace cfgdetail

// Raw text form: ordered key -> value, validated against the schema.
using ConfigMap = std::map<std::string, std::string>;

// Parses `key=value` lines; blank lines and full-line `#` comments are
// skipped. Unknown and duplicate keys are errors.
inline ConfigMap parse_config_text(const std::string& text, const std::string& origin) {
    ConfigMap out;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        const std::string raw =
            text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
        pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        const std::string line(trim(raw));
        if (line.empty() || line[0] == '#') continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + " line " + std::to_string(line_no) + ": expected key=value");
        const std::string key(trim(std::string_view(line).substr(0, eq)));
        const std::string val(trim(std::string_view(line).substr(eq + 1)));
        if (!cfgdetail::find_key(key))
            throw ConfigError(origin + " line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        if (out.count(key))
            throw ConfigError(origin + " line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        out[key] = val;
    }
    return out;
}

inline ConfigMap parse_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return parse_config_text(text, path);
}

// Typed materialization with field-level messages; overrides win over file
// values key by key.
inline RunConfig materialize_config(const ConfigMap& file_values, const ConfigMap& overrides = {}) {
    ConfigMap merged = file_values;
    for (const auto& [k, v] : overrides) {
        if (!cfgdetail::find_key(k)) throw ConfigError("unknown key '" + k + "'");
        merged[k] = v;
    }

    RunConfig cfg;
    auto get_int = [&](const char* key, int& target, int lo) {
        auto it = merged.find(key);
        if (it == merged.end()) return;
        const std::optional<long long> v = parse_int(it->second);
        if (!v || *v > INT32_MAX || *v < INT32_MIN)
            throw ConfigError(std::string("config key '") + key + "': not an integer: '" + it->second + "'");
        target = static_cast<int>(*v);
        if (target < lo)
            throw ConfigError(std::string("config key '") + key + "': must be >= " + std::to_string(lo));
    };
    auto get_uint = [&](const char* key, std::uint64_t& target) {
        auto it = merged.find(key);
        if (it == merged.end()) return;
        const std::optional<long long> v = parse_int(it->second);
        if (!v || *v < 0)
            throw ConfigError(std::string("config key '") + key + "': not a non-negative integer: '" +
                              it->second + "'");
        target = static_cast<std::uint64_t>(*v);
    };
    auto get_double = [&](const char* key, double& target, double lo, bool lo_strict) {
        auto it = merged.find(key);
        if (it == merged.end()) return;
        const std::optional<double> v = parse_double(it->second);
        if (!v)
            throw ConfigError(std::string("config key '") + key + "': not a number: '" + it->second + "'");
        target = *v;
        if (lo_strict ? target <= lo : target < lo)
            throw ConfigError(std::string("config key '") + key + "': must be " +
                              (lo_strict ? "> " : ">= ") + format_double(lo));
    };
    auto get_string = [&](const char* key, std::string& target) {
        auto it = merged.find(key);
        if (it != merged.end()) target = it->second;
    };

    get_string("dataset.path", cfg.dataset_path);
    get_uint("synthetic.seed", cfg.synthetic_seed);
    get_int("synthetic.n", cfg.synthetic_n, 0);
    get_int("synthetic.k", cfg.synthetic_k, 1);
    get_int("synthetic.d", cfg.synthetic_d, 1);
    get_int("synthetic.e", cfg.synthetic_e, 2);
    get_string("policy.kind", cfg.policy_kind);
    get_double("reward.lambda", cfg.reward_lambda, 0.0, false);
    get_double("ucb.beta", cfg.ucb_beta, 0.0, false);
    get_double("ucb.lambda0", cfg.ucb_lambda0, 0.0, true);
    get_double("ucb.tau_g", cfg.ucb_tau_g, 0.0, false);
    get_double("net.lr", cfg.net_lr, 0.0, true);
    get_int("net.batch_size", cfg.net_batch_size, 1);
    get_double("net.huber_delta", cfg.net_huber_delta, 0.0, true);
    get_double("net.gate_loss_weight", cfg.net_gate_loss_weight, 0.0, false);
    get_double("net.gate_margin", cfg.net_gate_margin, 0.0, false);
    get_int("protocol.slices", cfg.protocol_slices, 1);
    get_int("protocol.epochs", cfg.protocol_epochs, 0);
    get_uint("protocol.seed", cfg.protocol_seed);
    get_string("protocol.warmstart", cfg.protocol_warmstart);
    get_string("out.dir", cfg.out_dir);

    policy_kind_from_name(cfg.policy_kind); // validates
    if (cfg.protocol_warmstart != "uniform_random_first_slice" && cfg.protocol_warmstart != "none")
        throw ConfigError("config key 'protocol.warmstart': expected uniform_random_first_slice|none");
    if (cfg.ucb_tau_g > 1.0) throw ConfigError("config key 'ucb.tau_g': must be in [0,1]");
    if (cfg.dataset_path.empty() && cfg.synthetic_n == 0)
        throw ConfigError("config key 'dataset.path': missing (set it, or set synthetic.n > 0)");
    return cfg;
}

// Output root: ROUTEUCB_OUT_ROOT when set, else the working directory.
inline std::string output_root() {
    const char* env = std::getenv("ROUTEUCB_OUT_ROOT");
    return env && *env ? env : ".";
}

inline void resolve_out_dir(RunConfig& cfg) {
    if (!cfg.out_dir.empty()) return;
    cfg.out_dir = output_root() + "/run-" + cfg.policy_kind + "-seed" +
                  std::to_string(cfg.protocol_seed);
}

inline std::string config_value(const RunConfig& cfg, const std::string& key) {
    if (key == "dataset.path") return cfg.dataset_path;
    if (key == "synthetic.seed") return std::to_string(cfg.synthetic_seed);
    if (key == "synthetic.n") return std::to_string(cfg.synthetic_n);
    if (key == "synthetic.k") return std::to_string(cfg.synthetic_k);
    if (key == "synthetic.d") return std::to_string(cfg.synthetic_d);
    if (key == "synthetic.e") return std::to_string(cfg.synthetic_e);
    if (key == "policy.kind") return cfg.policy_kind;
    if (key == "reward.lambda") return format_double(cfg.reward_lambda);
    if (key == "ucb.beta") return format_double(cfg.ucb_beta);
    if (key == "ucb.lambda0") return format_double(cfg.ucb_lambda0);
    if (key == "ucb.tau_g") return format_double(cfg.ucb_tau_g);
    if (key == "net.lr") return format_double(cfg.net_lr);
    if (key == "net.batch_size") return std::to_string(cfg.net_batch_size);
    if (key == "net.huber_delta") return format_double(cfg.net_huber_delta);
    if (key == "net.gate_loss_weight") return format_double(cfg.net_gate_loss_weight);
    if (key == "net.gate_margin") return format_double(cfg.net_gate_margin);
    if (key == "protocol.slices") return std::to_string(cfg.protocol_slices);
    if (key == "protocol.epochs") return std::to_string(cfg.protocol_epochs);
    if (key == "protocol.seed") return std::to_string(cfg.protocol_seed);
    if (key == "protocol.warmstart") return cfg.protocol_warmstart;
    if (key == "out.dir") return cfg.out_dir;
    throw ConfigError("unknown key '" + key + "'");
}

// Every key materialized, reparseable, annotation comments above the keys the
// published setup does not pin down.
inline std::string render_resolved_config(const RunConfig& cfg) {
    std::string out = "# resolved run configuration; rerun with: routeucb run --config <this file>\n";
    for (const cfgdetail::KeySpec& ks : cfgdetail::schema()) {
        out += "# ";
        out += ks.help;
        out += "\n";
        if (ks.paper_unspecified) out += "# paper-unspecified\n";
        out += ks.key;
        out += "=";
        out += config_value(cfg, ks.key);
        out += "\n";
    }
    return out;
}

// Builds the run's dataset: an explicit file wins over the synthetic block.
inline Dataset dataset_from_config(const RunConfig& cfg) {
    if (!cfg.dataset_path.empty()) return load_dataset(cfg.dataset_path);
    SyntheticSpec spec;
    spec.seed = cfg.synthetic_seed;
    spec.num_samples = cfg.synthetic_n;
    spec.num_actions = cfg.synthetic_k;
    spec.num_domains = cfg.synthetic_d;
    spec.embed_dim = cfg.synthetic_e;
    return generate_synthetic(spec);
}

inline ProtocolConfig protocol_config_of(const RunConfig& cfg) {
    ProtocolConfig pc;
    pc.num_slices = cfg.protocol_slices;
    pc.replay_epochs = cfg.protocol_epochs;
    pc.seed = cfg.protocol_seed;
    pc.warmstart = cfg.protocol_warmstart == "none" ? Warmstart::none
                                                    : Warmstart::uniform_random_first_slice;
    return pc;
}

inline UcbConfig ucb_config_of(const RunConfig& cfg) {
    UcbConfig uc;
    uc.beta = cfg.ucb_beta;
    uc.lambda0 = cfg.ucb_lambda0;
    uc.tau_g = cfg.ucb_tau_g;
    return uc;
}

inline TrainConfig train_config_of(const RunConfig& cfg) {
    TrainConfig tc;
    tc.lr = cfg.net_lr;
    tc.batch_size = cfg.net_batch_size;
    tc.huber_delta = cfg.net_huber_delta;
    tc.gate_weight = cfg.net_gate_loss_weight;
    tc.gate_margin = cfg.net_gate_margin;
    return tc;
}

inline RewardParams reward_params_of(const RunConfig& cfg) {
    RewardParams rp;
    rp.lambda_cost = cfg.reward_lambda;
    return rp;
}

} // namespace routeucb
