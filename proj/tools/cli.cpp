#include "cli.hpp"

#include "subsel/config.hpp"
#include "subsel/criteria.hpp"
#include "subsel/engine.hpp"
#include "subsel/error.hpp"
#include "subsel/oracle.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

namespace subsel::cli {

namespace {

using nlohmann::json;
using linalg::Matrix;

const std::vector<std::string> kConfigFields = {"npop",        "nelite",       "keepbest",   "tabu",     "tabumemsize",
                                                "mutprob",     "mutintensity", "niterations", "minitbefstop",
                                                "niterreg",    "lambda",       "tolconv",    "workers",  "seed"};

struct Options {
    std::string data_path;
    std::string candidates_path;
    std::string test_path;
    std::string config_path;
    std::size_t ntoselect = 0;
    bool has_col_header = true;

    std::string criterion = "PEVMEAN";
    std::optional<double> weight;
    std::string contrast_path;
    std::string kinv_path;
    std::string response_column;
    std::string fixed_design_path;
    std::string target_kernel_path;
    std::string alignment_kernel = "vanraden";

    std::map<std::string, std::optional<std::string>> config_values;

    std::string output_path;
    std::string output_format = "json";
    std::string trace_csv;
    std::size_t log_iters = 0;

    std::size_t islands = 1;
    std::size_t rounds = 1;

    double tie_tolerance = 1e-9;
    std::uint64_t cap = 10'000'000;

    std::size_t bench_seeds = 20;
    std::optional<double> threshold;
    std::string summary_path;
};

struct Problem {
    LabeledMatrix data;
    PartitionPlan plan;
    CriterionSpec spec;
    RunConfig config;
};

void add_problem_options(CLI::App& cmd, Options& o) {
    cmd.add_option("--data_path", o.data_path, "CSV with row ids in the first column")->required();
    cmd.add_option("--candidates_path", o.candidates_path, "candidate ids, one per line");
    cmd.add_option("--test_path", o.test_path, "test ids, one per line");
    cmd.add_option("--ntoselect", o.ntoselect, "subset size")->required();
    cmd.add_option("--has_col_header", o.has_col_header, "first CSV row holds column ids")->default_val(true);
    cmd.add_option("--config", o.config_path, "key = value file with run settings");

    cmd.add_option("--criterion", o.criterion, "criterion name")->default_val("PEVMEAN");
    cmd.add_option("--weight", o.weight, "trade-off weight in [0, 1]");
    cmd.add_option("--contrast_path", o.contrast_path, "contrast matrix C (labeled CSV)");
    cmd.add_option("--kinv_path", o.kinv_path, "inverse kernel (labeled CSV)");
    cmd.add_option("--response_column", o.response_column, "response column id");
    cmd.add_option("--fixed_design_path", o.fixed_design_path, "fixed-effect design W (labeled CSV)");
    cmd.add_option("--target_kernel_path", o.target_kernel_path, "alignment target kernel (labeled CSV)");
    cmd.add_option("--alignment_kernel", o.alignment_kernel, "vanraden or scaled")
        ->check(CLI::IsMember({"vanraden", "scaled"}));

    for (const auto& key : kConfigFields) {
        cmd.add_option("--" + key, o.config_values[key], "run setting " + key);
    }
    cmd.add_option("--output_path", o.output_path, "result file (standard output when absent)");
    cmd.add_option("--output_format,--format", o.output_format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
}

Matrix align_square(const LabeledMatrix& m, const std::vector<std::string>& ids, const std::string& what) {
    if (m.rows() != m.cols()) throw Error(ErrorCode::SizeError, what + " must be square");
    std::vector<std::size_t> idx;
    idx.reserve(ids.size());
    for (const auto& id : ids) idx.push_back(m.row_index(id));
    const auto n = static_cast<Eigen::Index>(ids.size());
    Matrix out(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            out(i, j) = m.values()(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(i)]),
                                   static_cast<Eigen::Index>(idx[static_cast<std::size_t>(j)]));
        }
    }
    return out;
}

std::size_t column_index(const LabeledMatrix& m, const std::string& name) {
    if (auto c = m.find_col(name)) return *c;
    throw Error(ErrorCode::UnknownId, "unknown response column '" + name + "'");
}

Problem load_problem(const Options& o, const CriterionRegistry& registry) {
    RunConfig config;
    if (!o.config_path.empty()) apply_config_file(config, o.config_path);
    for (const auto& key : kConfigFields) {
        if (const auto& v = o.config_values.at(key)) set_config_field(config, key, *v);
    }
    validate_config(config);

    const CriterionInfo* info = registry.find(o.criterion);
    if (!info) throw Error(ErrorCode::UnknownCriterion, "unknown criterion '" + o.criterion + "'");

    LabeledMatrix raw = load_labeled_matrix(o.data_path, o.has_col_header);
    CriterionSpec spec;
    spec.name = o.criterion;
    spec.lambda = config.lambda;
    spec.weight = o.weight;
    spec.alignment_kernel = o.alignment_kernel == "scaled" ? AlignmentKernel::Scaled : AlignmentKernel::VanRaden;

    std::optional<LabeledMatrix> data;
    if (info->input == InputKind::Features) {
        if (!raw.col_ids()) {
            throw Error(ErrorCode::ParseError, o.criterion + " selects columns and needs a column header");
        }
        if (!o.response_column.empty()) {
            const std::size_t col = column_index(raw, o.response_column);
            spec.response = raw.values().col(static_cast<Eigen::Index>(col));
            data = raw.without_col(col).transposed();
        } else {
            data = raw.transposed();
        }
    } else if (info->input == InputKind::Observations && !o.response_column.empty()) {
        const std::size_t col = column_index(raw, o.response_column);
        Matrix v(raw.values().rows(), raw.values().cols());
        v.col(0) = raw.values().col(static_cast<Eigen::Index>(col));
        const LabeledMatrix rest = raw.without_col(col);
        v.rightCols(v.cols() - 1) = rest.values();
        std::vector<std::string> cols{o.response_column};
        for (const auto& c : *rest.col_ids()) cols.push_back(c);
        data = LabeledMatrix(raw.row_ids(), v, cols);
    } else {
        data = std::move(raw);
    }

    if (!o.contrast_path.empty()) spec.contrast = load_labeled_matrix(o.contrast_path, o.has_col_header).values();
    if (!o.kinv_path.empty()) spec.kernel_inverse = load_labeled_matrix(o.kinv_path, o.has_col_header);
    if (!o.fixed_design_path.empty()) {
        const LabeledMatrix w = load_labeled_matrix(o.fixed_design_path, o.has_col_header);
        spec.fixed_design = w.subset_rows(data->row_ids()).values();
    }
    if (!o.target_kernel_path.empty()) {
        const LabeledMatrix t = load_labeled_matrix(o.target_kernel_path, o.has_col_header);
        if (!data->col_ids()) throw Error(ErrorCode::ParseError, "target kernel alignment needs column ids");
        spec.target_kernel = align_square(t, *data->col_ids(), "target kernel");
    }

    std::optional<std::vector<std::string>> candidates;
    std::optional<std::vector<std::string>> test;
    if (!o.candidates_path.empty()) candidates = read_id_list(o.candidates_path);
    if (!o.test_path.empty()) test = read_id_list(o.test_path);
    PartitionPlan plan = validate_partition(*data, candidates, test, o.ntoselect);
    return Problem{std::move(*data), std::move(plan), std::move(spec), std::move(config)};
}

/// Writes to output_path, or to out when it is empty.
void emit(const Options& o, std::ostream& out, const std::string& text) {
    if (o.output_path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(o.output_path, std::ios::binary);
    if (!f) throw Error(ErrorCode::InvalidConfig, "cannot write '" + o.output_path + "'");
    f << text;
    if (!f) throw Error(ErrorCode::InvalidConfig, "cannot write '" + o.output_path + "'");
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::InvalidConfig, "cannot write '" + path + "'");
    f << text;
}

std::string join(const std::vector<std::string>& ids, char sep) {
    std::string out;
    for (const auto& id : ids) {
        if (!out.empty()) out += sep;
        out += id;
    }
    return out;
}

std::string number(double v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_select(const Options& o, std::ostream& out, std::ostream& err) {
    const CriterionRegistry registry;
    Problem p = load_problem(o, registry);
    const CriterionContext ctx(p.data, p.plan, p.spec, registry);
    RunOptions options;
    options.log = &err;
    options.log_every = o.log_iters;

    const auto t0 = std::chrono::steady_clock::now();
    const RunResult r = (o.islands > 1 || o.rounds > 1) ? run_islands(ctx, p.config, o.islands, o.rounds, options)
                                                        : run_lagat(ctx, p.config, options);
    const double elapsed = seconds_since(t0);

    if (o.output_format == "json") {
        json doc;
        doc["criterion"] = o.criterion;
        doc["solutions"] = json::array();
        for (std::size_t i = 0; i < r.ranked_solutions.size(); ++i) {
            doc["solutions"].push_back(
                {{"rank", i + 1}, {"members", r.ranked_solutions[i].members}, {"value", r.ranked_solutions[i].value}});
        }
        doc["trace"] = r.trace;
        doc["seed"] = r.seed_used;
        doc["evaluations"] = r.evaluations;
        doc["tabu_forced"] = r.tabu_forced;
        doc["elapsed_seconds"] = elapsed;
        emit(o, out, doc.dump(2) + "\n");
    } else {
        std::string text = "rank,value,members\n";
        for (std::size_t i = 0; i < r.ranked_solutions.size(); ++i) {
            text += std::to_string(i + 1) + "," + number(r.ranked_solutions[i].value) + "," +
                    join(r.ranked_solutions[i].members, ';') + "\n";
        }
        emit(o, out, text);
    }
    if (!o.trace_csv.empty()) {
        std::string text = "iteration,value\n";
        for (std::size_t i = 0; i < r.trace.size(); ++i) text += std::to_string(i) + "," + number(r.trace[i]) + "\n";
        write_file(o.trace_csv, text);
    }
    return kExitOk;
}

int cmd_enumerate(const Options& o, std::ostream& out) {
    const CriterionRegistry registry;
    Problem p = load_problem(o, registry);
    const CriterionContext ctx(p.data, p.plan, p.spec, registry);
    EnumerationOptions eo;
    eo.tie_tolerance = o.tie_tolerance;
    eo.cap = o.cap;
    eo.workers = p.config.workers;

    const auto t0 = std::chrono::steady_clock::now();
    const EnumerationResult r = enumerate_best(ctx, eo);
    const double elapsed = seconds_since(t0);

    if (o.output_format == "json") {
        json doc;
        doc["criterion"] = o.criterion;
        doc["min_value"] = r.min_value;
        doc["argmin_solutions"] = json::array();
        for (const auto& s : r.argmin_solutions) doc["argmin_solutions"].push_back(s.ids(p.plan));
        doc["subsets_evaluated"] = r.subsets_evaluated;
        doc["elapsed_seconds"] = elapsed;
        emit(o, out, doc.dump(2) + "\n");
    } else {
        std::string text = "rank,value,members\n";
        for (std::size_t i = 0; i < r.argmin_solutions.size(); ++i) {
            text += std::to_string(i + 1) + "," + number(r.min_value) + "," + join(r.argmin_solutions[i].ids(p.plan), ';') + "\n";
        }
        emit(o, out, text);
    }
    return kExitOk;
}

std::size_t iterations_to_threshold(const std::vector<double>& trace, double threshold) {
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (trace[i] <= threshold) return i;
    }
    return trace.size();
}

double median(std::vector<std::size_t> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? static_cast<double>(v[n / 2]) : 0.5 * static_cast<double>(v[n / 2 - 1] + v[n / 2]);
}

int cmd_bench(const Options& o, std::ostream& out) {
    if (o.bench_seeds < 1) throw Error(ErrorCode::InvalidConfig, "bench_seeds must be at least 1");
    const CriterionRegistry registry;
    Problem p = load_problem(o, registry);
    const CriterionContext ctx(p.data, p.plan, p.spec, registry);

    RunConfig ga = p.config;
    ga.minitbefstop = ga.niterations;
    ga.tabu = false;
    ga.niterreg = 0;
    RunConfig lagat = p.config;
    lagat.minitbefstop = lagat.niterations;
    lagat.tabu = true;

    struct Variant {
        std::string name;
        RunConfig config;
        std::vector<std::vector<double>> traces;
        std::vector<std::size_t> hits;
    };
    std::vector<Variant> variants = {{"GA", ga, {}, {}}, {"LA-GA-T", lagat, {}, {}}};
    std::vector<double> thresholds;
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t s = 0; s < o.bench_seeds; ++s) {
        for (auto& v : variants) {
            RunConfig c = v.config;
            c.seed = p.config.seed + s;
            v.traces.push_back(run_lagat(ctx, c).trace);
        }
        const double threshold = o.threshold ? *o.threshold : variants[0].traces.back().back();
        thresholds.push_back(threshold);
        for (auto& v : variants) v.hits.push_back(iterations_to_threshold(v.traces.back(), threshold));
    }
    const double elapsed = seconds_since(t0);

    json summary;
    for (const auto& v : variants) {
        summary[v.name] = {{"iterations_to_threshold", v.hits}, {"median_iterations_to_threshold", median(v.hits)}};
    }
    json meta = {{"criterion", o.criterion}, {"seed", p.config.seed}, {"seeds", o.bench_seeds},
                 {"thresholds", thresholds}, {"summary", summary}, {"elapsed_seconds", elapsed}};

    if (o.output_format == "json") {
        meta["traces"] = json::array();
        for (const auto& v : variants) {
            for (std::size_t s = 0; s < v.traces.size(); ++s) {
                meta["traces"].push_back({{"variant", v.name}, {"seed", p.config.seed + s}, {"values", v.traces[s]}});
            }
        }
        emit(o, out, meta.dump(2) + "\n");
    } else {
        std::string text = "variant,seed,iteration,value\n";
        for (const auto& v : variants) {
            for (std::size_t s = 0; s < v.traces.size(); ++s) {
                for (std::size_t i = 0; i < v.traces[s].size(); ++i) {
                    text += v.name + "," + std::to_string(p.config.seed + s) + "," + std::to_string(i) + "," +
                            number(v.traces[s][i]) + "\n";
                }
            }
        }
        emit(o, out, text);
        if (!o.summary_path.empty()) write_file(o.summary_path, meta.dump(2) + "\n");
    }
    return kExitOk;
}

int cmd_criteria(const Options& o, std::ostream& out) {
    const CriterionRegistry registry;
    const auto catalog = registry.catalog();
    if (o.output_format == "json") {
        json doc = json::array();
        for (const auto& c : catalog) {
            doc.push_back({{"name", c.name},
                           {"input", std::string(to_string(c.input))},
                           {"required", c.required},
                           {"formula", c.formula}});
        }
        emit(o, out, doc.dump(2) + "\n");
        return kExitOk;
    }
    std::ostringstream s;
    for (const auto& c : catalog) {
        s << c.name << '\t' << to_string(c.input) << '\t' << (c.required.empty() ? "-" : join(c.required, ' ')) << '\t'
          << c.formula << '\n';
    }
    emit(o, out, s.str());
    return kExitOk;
}

std::string one_line(std::string msg) {
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    return msg;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Subset selection with a look-ahead genetic algorithm", "subsel"};
    app.require_subcommand(1, 1);
    Options o;

    auto* select = app.add_subcommand("select", "optimize a subset with the genetic algorithm");
    add_problem_options(*select, o);
    select->add_option("--trace_csv,--trace-csv", o.trace_csv, "write iteration,value rows");
    select->add_option("--log_iters,--log-iters", o.log_iters, "log best value every N iterations to stderr");
    select->add_option("--islands", o.islands, "independent runs per round")->check(CLI::PositiveNumber);
    select->add_option("--rounds", o.rounds, "island rounds including the final run")->check(CLI::PositiveNumber);

    auto* enumerate = app.add_subcommand("enumerate", "evaluate every subset of the requested size");
    add_problem_options(*enumerate, o);
    enumerate->add_option("--tie_tolerance", o.tie_tolerance, "absolute tolerance for tied optima");
    enumerate->add_option("--cap", o.cap, "maximum number of subsets");

    auto* bench = app.add_subcommand("bench", "compare the plain GA with the look-ahead tabu variant");
    add_problem_options(*bench, o);
    bench->add_option("--bench_seeds", o.bench_seeds, "number of paired seeds");
    bench->add_option("--threshold", o.threshold, "target value; default is each seed's plain-GA final value");
    bench->add_option("--summary_path", o.summary_path, "JSON summary file (csv output)");

    auto* criteria = app.add_subcommand("criteria", "list the criterion catalog");
    std::string criteria_format = "text";
    criteria->add_option("--output_format,--format", criteria_format, "text or json")
        ->check(CLI::IsMember({"text", "json"}));
    criteria->add_option("--output_path", o.output_path, "listing file (standard output when absent)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "subsel: error: " << one_line(e.what()) << '\n';
        return kExitValidation;
    }

    try {
        if (select->parsed()) return cmd_select(o, out, err);
        if (enumerate->parsed()) return cmd_enumerate(o, out);
        if (bench->parsed()) return cmd_bench(o, out);
        o.output_format = criteria_format;
        return cmd_criteria(o, out);
    } catch (const Error& e) {
        err << "subsel: error: " << one_line(e.what()) << '\n';
        return is_validation_error(e.code()) ? kExitValidation : kExitRuntime;
    } catch (const std::exception& e) {
        err << "subsel: error: " << one_line(e.what()) << '\n';
        return kExitRuntime;
    }
}

} // namespace subsel::cli
