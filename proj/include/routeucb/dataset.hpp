#ifndef ROUTEUCB_DATASET_HPP
#define ROUTEUCB_DATASET_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "routeucb/linalg.hpp"
#include "routeucb/textio.hpp"

namespace routeucb {

inline constexpr int kNumMetaFeatures = 3;

// Raised on any dataset-file problem; line is 1-based, 0 when not line-specific.
struct DatasetError : std::runtime_error {
    int line;
    DatasetError(int line_no, const std::string& msg)
        : std::runtime_error(line_no > 0 ? "line " + std::to_string(line_no) + ": " + msg : msg),
          line(line_no) {}
};

// One benchmark query with full-information ground truth: quality and raw cost
// for every candidate action. Only the chosen action's entries are ever shown
// to a learning policy; the rest exist to make offline replay possible.
struct Sample {
    std::string id;
    int domain_id = 0;
    Vec embedding;
    std::array<double, kNumMetaFeatures> features{};
    Vec quality; // one entry per action, in [0,1]
    Vec cost;    // one entry per action, >= 0, raw units
};

struct DatasetHeader {
    int num_actions = 0;  // K
    int num_domains = 0;  // D
    int embed_dim = 0;    // E
    double cmax = 0.0;    // max raw cost over all samples and actions
    std::vector<std::string> model_names;
};

struct Dataset {
    DatasetHeader header;
    std::vector<Sample> samples; // replay order; never shuffled
};

// What the policy is allowed to see for one query.
struct RoutingContext {
    Vec embedding;
    std::array<double, kNumMetaFeatures> features{};
    int domain_id = 0;
};

inline RoutingContext context_of(const Sample& s) {
    return RoutingContext{s.embedding, s.features, s.domain_id};
}

// c~ = log(1+c) / log(1+Cmax). Costs above Cmax clamp to 1 instead of
// erroring (streaming replay may see costs the header never promised);
// clamp_counter, when given, records each occurrence.
inline double normalize_cost(double c, double cmax, std::uint64_t* clamp_counter = nullptr) {
    if (cmax <= 0.0) throw std::invalid_argument("normalize_cost: Cmax must be positive");
    if (c < 0.0) throw std::invalid_argument("normalize_cost: cost must be non-negative");
    if (c > cmax) {
        if (clamp_counter) ++*clamp_counter;
        return 1.0;
    }
    return std::log1p(c) / std::log1p(cmax);
}

namespace detail {

inline std::string_view expect_field(std::string_view token, std::string_view key, int line_no) {
    if (token.size() < key.size() + 1 || token.substr(0, key.size()) != key || token[key.size()] != '=')
        throw DatasetError(line_no, "expected field '" + std::string(key) + "=', got '" + std::string(token) + "'");
    return token.substr(key.size() + 1);
}

inline double parse_double_field(std::string_view text, std::string_view key, int line_no) {
    auto v = parse_double(text);
    if (!v) throw DatasetError(line_no, "bad number in field '" + std::string(key) + "': '" + std::string(text) + "'");
    return *v;
}

inline int parse_int_field(std::string_view text, std::string_view key, int line_no) {
    auto v = parse_int(text);
    if (!v) throw DatasetError(line_no, "bad integer in field '" + std::string(key) + "': '" + std::string(text) + "'");
    return static_cast<int>(*v);
}

inline Vec parse_vec_field(std::string_view text, std::string_view key, int expected, int line_no) {
    auto parts = split(text, ',');
    if (static_cast<int>(parts.size()) != expected)
        throw DatasetError(line_no, "field '" + std::string(key) + "' has " + std::to_string(parts.size()) +
                                        " entries, header requires " + std::to_string(expected));
    Vec out;
    out.reserve(parts.size());
    for (auto p : parts) out.push_back(parse_double_field(p, key, line_no));
    return out;
}

} // namespace detail

inline double recompute_cmax(const Dataset& ds) {
    double cmax = 0.0;
    for (const auto& s : ds.samples)
        for (double c : s.cost) cmax = std::max(cmax, c);
    return cmax;
}

// Validates a parsed dataset against its own header: per-sample dimensions,
// value ranges, and the header Cmax against the recomputed maximum.
inline void validate_dataset(const Dataset& ds) {
    const auto& h = ds.header;
    if (h.num_actions < 1) throw DatasetError(1, "header K must be >= 1");
    if (h.num_domains < 1) throw DatasetError(1, "header D must be >= 1");
    if (h.embed_dim < 1) throw DatasetError(1, "header E must be >= 1");
    if (static_cast<int>(h.model_names.size()) != h.num_actions)
        throw DatasetError(1, "header MODELS lists " + std::to_string(h.model_names.size()) +
                                  " names, K=" + std::to_string(h.num_actions));
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        const auto& s = ds.samples[i];
        const int line_no = static_cast<int>(i) + 2;
        if (s.domain_id < 0 || s.domain_id >= h.num_domains)
            throw DatasetError(line_no, "domain id " + std::to_string(s.domain_id) + " outside [0, " +
                                            std::to_string(h.num_domains) + ")");
        if (static_cast<int>(s.embedding.size()) != h.embed_dim)
            throw DatasetError(line_no, "embedding has " + std::to_string(s.embedding.size()) +
                                            " entries, header E=" + std::to_string(h.embed_dim));
        if (static_cast<int>(s.quality.size()) != h.num_actions)
            throw DatasetError(line_no, "quality has " + std::to_string(s.quality.size()) +
                                            " entries, header K=" + std::to_string(h.num_actions));
        if (static_cast<int>(s.cost.size()) != h.num_actions)
            throw DatasetError(line_no, "cost has " + std::to_string(s.cost.size()) +
                                            " entries, header K=" + std::to_string(h.num_actions));
        for (double q : s.quality)
            if (!(q >= 0.0 && q <= 1.0)) throw DatasetError(line_no, "quality value " + format_double(q) + " outside [0,1]");
        for (double c : s.cost)
            if (!(c >= 0.0)) throw DatasetError(line_no, "negative cost " + format_double(c));
    }
    const double actual = recompute_cmax(ds);
    const double scale = std::max({std::abs(actual), std::abs(h.cmax), 1e-300});
    if (std::abs(actual - h.cmax) > 1e-9 * scale)
        throw DatasetError(1, "header CMAX=" + format_double(h.cmax) +
                                  " disagrees with recomputed max cost " + format_double(actual));
}

// Line-delimited text format:
//   HDR K=<int> D=<int> E=<int> CMAX=<float> MODELS=<name,...>
//   SMP id=<str> d=<int> emb=<f,...> feat=<f,f,f> q=<f,...> c=<f,...>
inline Dataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DatasetError(0, "cannot open '" + path + "'");

    Dataset ds;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view sv = trim(line);
        if (sv.empty()) throw DatasetError(line_no, "blank line");
        auto tokens = split(sv, ' ');
        if (line_no == 1) {
            if (tokens.size() != 6 || tokens[0] != "HDR")
                throw DatasetError(line_no, "malformed header record");
            ds.header.num_actions = detail::parse_int_field(detail::expect_field(tokens[1], "K", line_no), "K", line_no);
            ds.header.num_domains = detail::parse_int_field(detail::expect_field(tokens[2], "D", line_no), "D", line_no);
            ds.header.embed_dim = detail::parse_int_field(detail::expect_field(tokens[3], "E", line_no), "E", line_no);
            ds.header.cmax = detail::parse_double_field(detail::expect_field(tokens[4], "CMAX", line_no), "CMAX", line_no);
            for (auto name : split(detail::expect_field(tokens[5], "MODELS", line_no), ','))
                ds.header.model_names.emplace_back(name);
            continue;
        }
        if (tokens.size() != 7 || tokens[0] != "SMP")
            throw DatasetError(line_no, "malformed sample record");
        Sample s;
        s.id = std::string(detail::expect_field(tokens[1], "id", line_no));
        if (s.id.empty()) throw DatasetError(line_no, "empty sample id");
        s.domain_id = detail::parse_int_field(detail::expect_field(tokens[2], "d", line_no), "d", line_no);
        s.embedding = detail::parse_vec_field(detail::expect_field(tokens[3], "emb", line_no), "emb", ds.header.embed_dim, line_no);
        Vec feat = detail::parse_vec_field(detail::expect_field(tokens[4], "feat", line_no), "feat", kNumMetaFeatures, line_no);
        for (int i = 0; i < kNumMetaFeatures; ++i) s.features[static_cast<std::size_t>(i)] = feat[static_cast<std::size_t>(i)];
        s.quality = detail::parse_vec_field(detail::expect_field(tokens[5], "q", line_no), "q", ds.header.num_actions, line_no);
        s.cost = detail::parse_vec_field(detail::expect_field(tokens[6], "c", line_no), "c", ds.header.num_actions, line_no);
        ds.samples.push_back(std::move(s));
    }
    if (line_no == 0) throw DatasetError(0, "empty file '" + path + "'");
    validate_dataset(ds);
    return ds;
}

namespace detail {

inline void append_vec(std::string& out, const Vec& v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += format_double(v[i]);
    }
}

} // namespace detail

inline void save_dataset(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DatasetError(0, "cannot write '" + path + "'");
    std::string line = "HDR K=" + std::to_string(ds.header.num_actions) +
                       " D=" + std::to_string(ds.header.num_domains) +
                       " E=" + std::to_string(ds.header.embed_dim) +
                       " CMAX=" + format_double(ds.header.cmax) + " MODELS=";
    for (std::size_t i = 0; i < ds.header.model_names.size(); ++i) {
        if (i) line += ',';
        line += ds.header.model_names[i];
    }
    out << line << '\n';
    for (const auto& s : ds.samples) {
        line = "SMP id=" + s.id + " d=" + std::to_string(s.domain_id) + " emb=";
        detail::append_vec(line, s.embedding);
        line += " feat=";
        detail::append_vec(line, Vec(s.features.begin(), s.features.end()));
        line += " q=";
        detail::append_vec(line, s.quality);
        line += " c=";
        detail::append_vec(line, s.cost);
        out << line << '\n';
    }
    if (!out) throw DatasetError(0, "write failed on '" + path + "'");
}

} // namespace routeucb

#endif
