#include "signdim/config.hpp"

#include <charconv>
#include <string>

#include "signdim/error.hpp"
#include "signdim/io.hpp"

namespace signdim {

using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(std::size_t line_no, const std::string& what) {
    throw Error(ErrorKind::ParseError, "config line " + std::to_string(line_no) + ": " + what);
}

json parse_scalar(std::string_view v, std::size_t line_no) {
    if (v.empty()) fail(line_no, "missing value");
    if (v.front() == '"') {
        if (v.size() < 2 || v.back() != '"') fail(line_no, "unterminated string");
        std::string out;
        for (std::size_t i = 1; i + 1 < v.size(); ++i) {
            if (v[i] == '\\' && i + 2 < v.size()) {
                ++i;
                out.push_back(v[i] == 'n' ? '\n' : v[i] == 't' ? '\t' : v[i]);
            } else {
                out.push_back(v[i]);
            }
        }
        return out;
    }
    if (v == "true") return true;
    if (v == "false") return false;
    std::int64_t iv = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), iv);
    if (ec == std::errc() && p == v.data() + v.size()) return iv;
    double dv = 0;
    auto [pd, ecd] = std::from_chars(v.data(), v.data() + v.size(), dv);
    if (ecd == std::errc() && pd == v.data() + v.size()) return dv;
    fail(line_no, "unsupported value '" + std::string(v) + "'");
}

// Strips a trailing comment that is not inside a string.
std::string_view strip_comment(std::string_view line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
        if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

template <typename T>
void take(const json& section, const char* key, T& out) {
    if (!section.is_object()) return;
    const auto it = section.find(key);
    if (it == section.end()) return;
    try {
        out = it->get<T>();
    } catch (const json::exception&) {
        throw Error(ErrorKind::ParseError, std::string("config key '") + key + "' has the wrong type");
    }
}

const json& section(const json& cfg, const char* name) {
    static const json empty = json::object();
    if (!cfg.is_object()) return empty;
    const auto it = cfg.find(name);
    return it == cfg.end() ? empty : *it;
}

}  // namespace

json parse_toml_subset(std::string_view text) {
    json root = json::object();
    json* current = &root;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        line = trim(strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(line_no, "bad section header");
            const std::string name(trim(line.substr(1, line.size() - 2)));
            if (name.empty()) fail(line_no, "empty section name");
            current = &root[name];
            if (current->is_null()) *current = json::object();
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) fail(line_no, "expected key = value");
        const std::string key(trim(line.substr(0, eq)));
        if (key.empty()) fail(line_no, "empty key");
        (*current)[key] = parse_scalar(trim(line.substr(eq + 1)), line_no);
    }
    return root;
}

json load_config(const std::filesystem::path& path) {
    const std::string text = io::read_file(path);
    if (path.extension() == ".json") {
        try {
            return json::parse(text);
        } catch (const json::exception& e) {
            throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
        }
    }
    return parse_toml_subset(text);
}

void apply_config(const json& cfg, FitConfig& fit) {
    const json& s = section(cfg, "fit");
    take(cfg, "seed", fit.seed);
    take(s, "r", fit.r);
    take(s, "alpha", fit.alpha);
    take(s, "step_size", fit.step_size);
    take(s, "epochs", fit.n_epochs);
    take(s, "batch", fit.batch);
    take(s, "tol", fit.tol);
}

void apply_config(const json& cfg, BoundConfig& bound) {
    const json& s = section(cfg, "bound");
    take(cfg, "seed", bound.seed);
    take(s, "sources", bound.n_sources);
    take(s, "exhaustive_source_limit", bound.exhaustive_source_limit);
    take(s, "try_transpose", bound.try_transpose);
}

void apply_config(const json& cfg, SearchBudget& budget) {
    const json& s = section(cfg, "search");
    take(s, "restarts", budget.restarts);
    take(s, "sweeps", budget.sweeps);
}

void apply_config(const json& cfg, FeasibilityConfig& feas) {
    take(cfg, "seed", feas.seed);
    std::string solver;
    take(cfg, "solver", solver);
    if (!solver.empty()) feas.solver_command = solver;
    apply_config(cfg, feas.budget);
}

void apply_config(const json& cfg, PipelineConfig& pipeline) {
    take(section(cfg, "pipeline"), "max_exact", pipeline.max_exact);
    apply_config(cfg, pipeline.feasibility);
    apply_config(cfg, pipeline.bound);
}

void apply_config(const json& cfg, LooConfig& loo) {
    const json& s = section(cfg, "loo");
    take(cfg, "seed", loo.seed);
    std::string model;
    take(s, "model", model);
    if (model == "dvm" || model == "DVM") loo.model = VoteModel::DVM;
    else if (model == "pvm" || model == "PVM") loo.model = VoteModel::PVM;
    else if (!model.empty()) throw Error(ErrorKind::ParseError, "loo.model must be dvm or pvm");
    take(s, "r", loo.r);
    take(s, "max_holdouts", loo.max_holdouts);
    take(s, "warm_start", loo.warm_start);
    apply_config(cfg, loo.fit);
    apply_config(cfg, loo.budget);
}

void apply_config(const json& cfg, ReportConfig& report) {
    const json& s = section(cfg, "pipeline");
    take(s, "min_comments", report.min_comments);
    take(s, "embed", report.embed);
    take(s, "run_loo", report.run_loo);
    apply_config(cfg, report.pipeline);
    apply_config(cfg, report.fit);
    apply_config(cfg, report.loo);
}

void apply_config(const json& cfg, SyntheticParams& params) {
    const json& s = section(cfg, "simulate");
    take(cfg, "seed", params.seed);
    take(s, "comments", params.n_comments);
    take(s, "voters", params.n_voters);
    take(s, "r_true", params.r_true);
    take(s, "observe_prob", params.observe_prob);
    take(s, "consensus", params.consensus);
    take(s, "scale", params.scale);
    std::string model;
    take(s, "model", model);
    if (model == "deterministic") params.model = SyntheticModel::Deterministic;
    else if (model == "probabilistic") params.model = SyntheticModel::Probabilistic;
    else if (!model.empty())
        throw Error(ErrorKind::ParseError, "simulate.model must be deterministic or probabilistic");
}

}  // namespace signdim
