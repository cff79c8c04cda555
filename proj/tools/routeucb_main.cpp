// Command-line front end: dataset generation and linting, protocol runs,
// and run comparison. Exit codes: 0 ok, 2 usage/config problems, 1 runtime
// failures.

#include "routeucb/routeucb.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

namespace {

using namespace routeucb;

struct GenArgs {
    std::uint64_t seed = 1;
    int n = 2000;
    int k = 5;
    int d = 8;
    int e = 16;
    std::string out;
};

int cmd_gen(const GenArgs& a) {
    SyntheticSpec spec;
    spec.seed = a.seed;
    spec.num_samples = a.n;
    spec.num_actions = a.k;
    spec.num_domains = a.d;
    spec.embed_dim = a.e;
    const Dataset ds = generate_synthetic(spec);
    save_dataset(ds, a.out);
    std::cout << "wrote " << a.out << ": n=" << ds.samples.size() << " K=" << ds.header.num_actions
              << " D=" << ds.header.num_domains << " E=" << ds.header.embed_dim
              << " Cmax=" << format_double(ds.header.cmax) << "\n";
    return 0;
}

int cmd_validate(const std::string& path) {
    const Dataset ds = load_dataset(path); // throws DatasetError with a line number
    std::cout << "ok: " << path << ": n=" << ds.samples.size() << " K=" << ds.header.num_actions
              << " D=" << ds.header.num_domains << " E=" << ds.header.embed_dim << "\n";
    return 0;
}

int cmd_run(const std::string& config_path, const ConfigMap& overrides) {
    const ConfigMap file_values = config_path.empty() ? ConfigMap{} : parse_config_file(config_path);
    RunConfig cfg = materialize_config(file_values, overrides);
    resolve_out_dir(cfg);

    const Dataset ds = dataset_from_config(cfg);
    const PolicyKind kind = policy_kind_from_name(cfg.policy_kind);

    std::filesystem::create_directories(cfg.out_dir);
    ProtocolRunner runner(ds, kind, protocol_config_of(cfg), reward_params_of(cfg),
                          ucb_config_of(cfg), train_config_of(cfg));
    runner.run_all();

    write_metrics_csv(cfg.out_dir + "/metrics.csv", runner.metrics(), ds.header.num_actions);
    write_domain_metrics_csv(cfg.out_dir + "/domain_metrics.csv", runner.metrics());
    {
        std::ofstream f(cfg.out_dir + "/config.resolved", std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write " + cfg.out_dir + "/config.resolved");
        f << render_resolved_config(cfg);
    }
    if (kind == PolicyKind::neural_ucb)
        save_checkpoint(runner.params(), runner.opt(), cfg.out_dir + "/checkpoint.bin");

    const SliceMetrics& last = runner.metrics().back();
    std::cout << "run complete: policy=" << cfg.policy_kind << " slices=" << runner.metrics().size()
              << " final avg_reward=" << format_double(last.avg_reward)
              << " avg_cost=" << format_double(last.avg_cost) << "\n"
              << "outputs in " << cfg.out_dir << "\n";
    return 0;
}

std::string run_label(const std::string& dir) {
    std::string d = dir;
    while (d.size() > 1 && d.back() == '/') d.pop_back();
    const std::string name = std::filesystem::path(d).filename().string();
    return name.empty() ? d : name;
}

int cmd_compare(const std::vector<std::string>& dirs, const std::string& out_csv) {
    std::vector<std::string> names;
    std::vector<std::vector<SliceMetrics>> runs;
    for (const std::string& dir : dirs) {
        names.push_back(run_label(dir));
        runs.push_back(read_metrics_csv(dir + "/metrics.csv"));
    }
    const std::string csv = compare_runs_csv(names, runs);
    const std::string summary = compare_runs_summary(names, runs);
    if (out_csv.empty()) {
        std::cout << csv;
        std::cerr << summary;
    } else {
        std::ofstream f(out_csv, std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write " + out_csv);
        f << csv;
        std::cout << summary << "comparison CSV written to " << out_csv << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cost-aware LLM routing bandit and offline replay simulator"};
    app.require_subcommand(1);

    GenArgs gen_args;
    CLI::App* gen = app.add_subcommand("gen", "generate a synthetic dataset file");
    gen->add_option("--seed", gen_args.seed, "generator seed");
    gen->add_option("--n", gen_args.n, "sample count");
    gen->add_option("--k", gen_args.k, "action count");
    gen->add_option("--d", gen_args.d, "domain count");
    gen->add_option("--e", gen_args.e, "embedding width");
    gen->add_option("--out", gen_args.out, "output dataset path")->required();

    std::string validate_path;
    CLI::App* validate = app.add_subcommand("validate", "lint a dataset file");
    validate->add_option("path", validate_path, "dataset file")->required();

    std::string config_path;
    auto overrides = std::make_shared<routeucb::ConfigMap>();
    CLI::App* run = app.add_subcommand("run", "run a policy over the stream and write metrics");
    run->add_option("--config", config_path, "key=value config file");
    for (const auto& ks : routeucb::cfgdetail::schema()) {
        const std::string key = ks.key;
        run->add_option_function<std::string>(
            "--" + key, [overrides, key](const std::string& v) { (*overrides)[key] = v; }, ks.help);
    }

    std::vector<std::string> compare_dirs;
    std::string compare_out;
    CLI::App* compare = app.add_subcommand("compare", "join runs into plot-ready CSV plus a summary");
    compare->add_option("runs", compare_dirs, "run directories containing metrics.csv")
        ->required()
        ->expected(-1);
    compare->add_option("--out", compare_out,
                        "long-format CSV target (omitted: CSV to stdout, summary to stderr)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (gen->parsed()) return cmd_gen(gen_args);
        if (validate->parsed()) return cmd_validate(validate_path);
        if (run->parsed()) return cmd_run(config_path, *overrides);
        if (compare->parsed()) return cmd_compare(compare_dirs, compare_out);
    } catch (const routeucb::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const routeucb::DatasetError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const routeucb::MetricsError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
