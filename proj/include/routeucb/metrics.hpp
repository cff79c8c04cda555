#pragma once
// Per-slice evaluation metrics and their CSV forms. Metrics are computed on
// the evaluator side from the full sample tables; the policy itself never
// sees them. All floats serialize with 17 significant digits so identical
// runs produce byte-identical files.

#include "routeucb/dataset.hpp"
#include "routeucb/replay.hpp"
#include "routeucb/reward.hpp"
#include "routeucb/textio.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace routeucb {

struct MetricsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SliceMetrics {
    int slice_index = 0; // 1-based, matching the protocol's slice numbering
    double avg_reward = 0.0;
    double cum_reward = 0.0; // total reward of all samples up to and including this slice
    double avg_cost = 0.0;   // raw cost units of chosen actions
    double avg_quality = 0.0;
    double gate_open_rate = 0.0;
    Vec action_rate;                          // K entries, sums to 1
    std::map<int, double> domain_avg_reward;  // only domains present in the slice
    std::map<int, int> domain_count;
};

// Aggregates one slice. records[i] must be the decision for
// samples[sample_offset + i]; every stored reward is recomputed from the
// sample tables and must match, which catches buffer/stream misalignment.
// cum_before is the cumulative reward total of earlier slices; gate_open_rate
// is decision-path information the caller carries in.
inline SliceMetrics compute_slice_metrics(const std::vector<ReplayRecord>& records,
                                          const std::vector<Sample>& samples,
                                          std::size_t sample_offset, int num_actions,
                                          double cmax, const RewardParams& rp, int slice_index,
                                          double cum_before = 0.0, double gate_open_rate = 0.0) {
    if (records.empty()) throw MetricsError("compute_slice_metrics: empty slice");
    if (sample_offset + records.size() > samples.size())
        throw MetricsError("compute_slice_metrics: records extend past the sample stream");

    SliceMetrics m;
    m.slice_index = slice_index;
    m.gate_open_rate = gate_open_rate;
    m.action_rate.assign(static_cast<std::size_t>(num_actions), 0.0);

    double reward_sum = 0.0, cost_sum = 0.0, quality_sum = 0.0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const ReplayRecord& rec = records[i];
        const Sample& s = samples[sample_offset + i];
        if (rec.action < 0 || rec.action >= num_actions)
            throw MetricsError("compute_slice_metrics: action out of range at record " + std::to_string(i));
        const double expect = utility_reward(s.quality[static_cast<std::size_t>(rec.action)],
                                             normalize_cost(s.cost[static_cast<std::size_t>(rec.action)], cmax), rp);
        if (std::fabs(expect - rec.reward) > 1e-9)
            throw MetricsError("compute_slice_metrics: stored reward disagrees with sample tables at record " +
                               std::to_string(i) + " (replay misalignment?)");
        reward_sum += rec.reward;
        cost_sum += s.cost[static_cast<std::size_t>(rec.action)];
        quality_sum += s.quality[static_cast<std::size_t>(rec.action)];
        m.action_rate[static_cast<std::size_t>(rec.action)] += 1.0;
        m.domain_avg_reward[s.domain_id] += rec.reward;
        m.domain_count[s.domain_id] += 1;
    }
    const double inv_n = 1.0 / static_cast<double>(records.size());
    m.avg_reward = reward_sum * inv_n;
    m.cum_reward = cum_before + reward_sum;
    m.avg_cost = cost_sum * inv_n;
    m.avg_quality = quality_sum * inv_n;
    for (double& r : m.action_rate) r *= inv_n;
    for (auto& [d, sum] : m.domain_avg_reward) sum /= m.domain_count[d];
    return m;
}

// ---- CSV forms ----

inline std::string metrics_csv_header(int num_actions) {
    std::string h = "slice,avg_reward,cum_reward,avg_cost,avg_quality,gate_open_rate";
    for (int a = 0; a < num_actions; ++a) h += ",action_rate_" + std::to_string(a);
    return h;
}

inline void write_metrics_csv(const std::string& path, const std::vector<SliceMetrics>& slices,
                              int num_actions) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw MetricsError("cannot open '" + path + "' for writing");
    f << metrics_csv_header(num_actions) << "\n";
    for (const SliceMetrics& m : slices) {
        f << m.slice_index << ',' << format_double(m.avg_reward) << ',' << format_double(m.cum_reward)
          << ',' << format_double(m.avg_cost) << ',' << format_double(m.avg_quality) << ','
          << format_double(m.gate_open_rate);
        for (double r : m.action_rate) f << ',' << format_double(r);
        f << "\n";
    }
    if (!f) throw MetricsError("write failed on '" + path + "'");
}

inline void write_domain_metrics_csv(const std::string& path, const std::vector<SliceMetrics>& slices) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw MetricsError("cannot open '" + path + "' for writing");
    f << "slice,domain_id,avg_reward,count\n";
    for (const SliceMetrics& m : slices)
        for (const auto& [d, r] : m.domain_avg_reward)
            f << m.slice_index << ',' << d << ',' << format_double(r) << ',' << m.domain_count.at(d) << "\n";
    if (!f) throw MetricsError("write failed on '" + path + "'");
}

// Reads back what write_metrics_csv produced. Domain sidecars are write-only;
// comparisons operate on the main table.
inline std::vector<SliceMetrics> read_metrics_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw MetricsError("cannot open metrics file '" + path + "'");
    std::string line;
    if (!std::getline(f, line)) throw MetricsError("empty metrics file '" + path + "'");
    const std::vector<std::string_view> head = split(trim(line), ',');
    if (head.size() < 7 || head[0] != "slice")
        throw MetricsError("unrecognized metrics header in '" + path + "'");
    const int num_actions = static_cast<int>(head.size()) - 6;
    for (int a = 0; a < num_actions; ++a)
        if (head[static_cast<std::size_t>(6 + a)] != "action_rate_" + std::to_string(a))
            throw MetricsError("unrecognized metrics header in '" + path + "'");

    std::vector<SliceMetrics> out;
    int line_no = 1;
    while (std::getline(f, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::vector<std::string_view> parts = split(trim(line), ',');
        if (parts.size() != head.size())
            throw MetricsError("'" + path + "' line " + std::to_string(line_no) + ": wrong column count");
        auto num = [&](std::size_t col) {
            const std::optional<double> v = parse_double(parts[col]);
            if (!v)
                throw MetricsError("'" + path + "' line " + std::to_string(line_no) + ": bad number '" +
                                   std::string(parts[col]) + "'");
            return *v;
        };
        const std::optional<long long> idx = parse_int(parts[0]);
        if (!idx)
            throw MetricsError("'" + path + "' line " + std::to_string(line_no) + ": bad slice index");
        SliceMetrics m;
        m.slice_index = static_cast<int>(*idx);
        m.avg_reward = num(1);
        m.cum_reward = num(2);
        m.avg_cost = num(3);
        m.avg_quality = num(4);
        m.gate_open_rate = num(5);
        m.action_rate.resize(static_cast<std::size_t>(num_actions));
        for (int a = 0; a < num_actions; ++a) m.action_rate[static_cast<std::size_t>(a)] = num(static_cast<std::size_t>(6 + a));
        out.push_back(std::move(m));
    }
    if (out.empty()) throw MetricsError("no metric rows in '" + path + "'");
    return out;
}

// ---- run comparison ----

// Long-format join of several runs' metrics, one row per (run, slice,
// metric). All runs must cover the same slice range.
inline std::string compare_runs_csv(const std::vector<std::string>& names,
                                    const std::vector<std::vector<SliceMetrics>>& runs) {
    if (names.size() != runs.size() || runs.empty())
        throw MetricsError("compare_runs: need one name per run");
    const std::size_t slices = runs[0].size();
    for (std::size_t r = 1; r < runs.size(); ++r)
        if (runs[r].size() != slices)
            throw MetricsError("compare_runs: slice count mismatch between '" + names[0] + "' (" +
                               std::to_string(slices) + ") and '" + names[r] + "' (" +
                               std::to_string(runs[r].size()) + ")");
    std::ostringstream out;
    out << "run,slice,metric,value\n";
    for (std::size_t r = 0; r < runs.size(); ++r) {
        for (const SliceMetrics& m : runs[r]) {
            out << names[r] << ',' << m.slice_index << ",avg_reward," << format_double(m.avg_reward) << "\n";
            out << names[r] << ',' << m.slice_index << ",cum_reward," << format_double(m.cum_reward) << "\n";
            out << names[r] << ',' << m.slice_index << ",avg_cost," << format_double(m.avg_cost) << "\n";
            out << names[r] << ',' << m.slice_index << ",avg_quality," << format_double(m.avg_quality) << "\n";
            out << names[r] << ',' << m.slice_index << ",gate_open_rate," << format_double(m.gate_open_rate) << "\n";
            for (std::size_t a = 0; a < m.action_rate.size(); ++a)
                out << names[r] << ',' << m.slice_index << ",action_rate_" << a << ','
                    << format_double(m.action_rate[a]) << "\n";
        }
    }
    return out.str();
}

// Human-readable final-slice table. The first slice is warm-start-affected,
// so it is labeled as such wherever it would be read as a result.
inline std::string compare_runs_summary(const std::vector<std::string>& names,
                                        const std::vector<std::vector<SliceMetrics>>& runs) {
    if (names.size() != runs.size() || runs.empty())
        throw MetricsError("compare_runs: need one name per run");
    std::ostringstream out;
    out << "final-slice summary (slice " << runs[0].back().slice_index << "; slice "
        << runs[0].front().slice_index << " is warm-start-affected and excluded from comparisons)\n";
    out << "run                        avg_reward   avg_cost   avg_quality  gate_open\n";
    for (std::size_t r = 0; r < runs.size(); ++r) {
        const SliceMetrics& m = runs[r].back();
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%-26s %10.4f %10.4f %12.4f %10.4f\n", names[r].c_str(),
                      m.avg_reward, m.avg_cost, m.avg_quality, m.gate_open_rate);
        out << buf;
    }
    return out.str();
}

} // namespace routeucb
