#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>

#include "CLI11.hpp"

#include "refcmfs/baselines.hpp"
#include "refcmfs/metrics.hpp"
#include "refcmfs/refcmfs.hpp"
#include "refcmfs/rng.hpp"

namespace refcmfs::cli {

namespace {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

template <class T>
std::vector<T> parse_list(const std::string& text, const std::string& what) {
    std::vector<T> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        T v{};
        const auto* first = item.data();
        const auto* last = item.data() + item.size();
        const auto [end, ec] = std::from_chars(first, last, v);
        if (item.empty() || ec != std::errc() || end != last)
            throw CliError(kExitConfigError, "invalid config", "bad " + what + " entry '" + item + "'");
        values.push_back(v);
    }
    if (values.empty()) throw CliError(kExitConfigError, "invalid config", what + " is empty");
    return values;
}

std::optional<io::LabelColumn> parse_label_column(const std::string& text) {
    if (text == "none") return std::nullopt;
    if (text == "last") return io::LabelColumn::last();
    std::size_t index = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), index);
    if (text.empty() || ec != std::errc() || end != text.data() + text.size())
        throw CliError(kExitConfigError, "invalid config",
                       "--labels-col must be none, last or a column index");
    return io::LabelColumn::at(index);
}

io::Normalization parse_normalization(const std::string& text) {
    if (text == "none") return io::Normalization::None;
    if (text == "minmax") return io::Normalization::MinMaxPerFeature;
    if (text == "zscore") return io::Normalization::ZScorePerFeature;
    throw CliError(kExitConfigError, "invalid config", "--normalize must be none, minmax or zscore");
}

InitStrategy parse_init(const std::string& text) {
    if (text == "kmeanspp") return KMeansPlusPlus{};
    if (text == "random") return RandomSamples{};
    throw CliError(kExitConfigError, "invalid config", "--init must be kmeanspp or random");
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw CliError(kExitConfigError, "invalid config", "cannot write " + path);
    file << text;
}

void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
    if (out_path.empty())
        out << text;
    else
        write_file(out_path, text);
}

} // namespace

Algorithm parse_algorithm(const std::string& name) {
    if (name == "refcmfs") return Algorithm::Refcmfs;
    if (name == "kmeans") return Algorithm::KMeans;
    if (name == "fcm") return Algorithm::FCM;
    if (name == "sim-refcmfs") return Algorithm::SimRefcmfs;
    static const std::vector<std::string> unsupported{"kmedoids", "k-medoids", "gmm", "sc",
                                                      "lsc",      "rsfkm",     "kmeanspp"};
    if (std::find(unsupported.begin(), unsupported.end(), name) != unsupported.end())
        throw CliError(kExitUnknownAlgorithm, "unsupported baseline", name);
    throw CliError(kExitUnknownAlgorithm, "unknown algorithm", name);
}

std::string algorithm_name(Algorithm algo) {
    switch (algo) {
    case Algorithm::Refcmfs: return "refcmfs";
    case Algorithm::KMeans: return "kmeans";
    case Algorithm::FCM: return "fcm";
    case Algorithm::SimRefcmfs: return "sim-refcmfs";
    }
    return "?";
}

io::LabeledDataset load_dataset(const RunOptions& options) {
    const auto label_column = parse_label_column(options.labels_col);
    const auto mode = parse_normalization(options.normalize);
    try {
        auto dataset = io::load_csv(options.data_path, options.header, label_column);
        return {io::normalize(dataset.data, mode), std::move(dataset.labels), dataset.name};
    } catch (const io::ParseError& e) {
        throw CliError(kExitDataError, "dataset parse failure", e.what());
    } catch (const std::invalid_argument& e) {
        throw CliError(kExitDataError, "dataset parse failure", e.what());
    }
}

RunReport run_once(const io::LabeledDataset& dataset, const RunOptions& options) {
    const Algorithm algo = parse_algorithm(options.algo);
    const InitStrategy init = parse_init(options.init);
    const auto& data = dataset.data;

    std::vector<std::string> warnings;
    const auto started = std::chrono::steady_clock::now();
    std::optional<FitResult> result;
    try {
        if (algo == Algorithm::Refcmfs) {
            FitConfig config{options.c, options.r, options.k_tilde.value_or(0), options.tol,
                             options.max_iter, init, options.seed};
            if (!options.k_tilde) throw ConfigError("--k-tilde is required for refcmfs");
            warnings = validate_config(config, data).warnings;
            result = fit(data, config);
        } else {
            baselines::BaselineConfig config;
            config.cluster_count = options.c;
            config.tolerance = options.tol;
            config.max_iter = options.max_iter;
            config.init = init;
            config.rng_seed = options.seed;
            if (algo == Algorithm::KMeans) {
                config.variant = baselines::Variant::KMeans;
            } else if (algo == Algorithm::FCM) {
                config.variant = baselines::Variant::FCM;
                config.fuzzifier = options.r;
            } else {
                config.variant = baselines::Variant::SimREFCMFS;
                config.fuzzifier = options.r;
                if (!options.k_tilde) throw ConfigError("--k-tilde is required for sim-refcmfs");
                config.k_tilde = *options.k_tilde;
            }
            warnings = baselines::validate_config(config, data).warnings;
            result = baselines::fit(data, config);
        }
    } catch (const ConfigError& e) {
        throw CliError(kExitConfigError, "invalid config", e.what());
    }
    const auto elapsed = std::chrono::steady_clock::now() - started;

    RunReport report{algorithm_name(algo),
                     options,
                     dataset.name,
                     data.rows(),
                     data.dim(),
                     std::nullopt,
                     std::nullopt,
                     std::move(*result),
                     std::chrono::duration<double>(elapsed).count(),
                     std::move(warnings)};
    if (dataset.labels) {
        report.acc = metrics::accuracy(report.result.labels, *dataset.labels);
        report.nmi = metrics::nmi(report.result.labels, *dataset.labels);
    }
    return report;
}

Json to_json(const RunReport& report) {
    const auto& o = report.config;
    const auto algo = parse_algorithm(o.algo);
    const bool uses_r = algo != Algorithm::KMeans;
    const bool uses_k = algo == Algorithm::Refcmfs || algo == Algorithm::SimRefcmfs;

    Json config;
    config["algo"] = report.algorithm;
    config["data"] = o.data_path;
    config["labels_col"] = o.labels_col;
    config["header"] = o.header;
    config["normalize"] = o.normalize;
    config["c"] = o.c;
    config["k_tilde"] = uses_k && o.k_tilde ? Json(*o.k_tilde) : Json(nullptr);
    config["r"] = uses_r ? Json(o.r) : Json(nullptr);
    config["tol"] = o.tol;
    config["max_iter"] = o.max_iter;
    config["init"] = o.init;
    config["seed"] = o.seed;

    const auto& res = report.result;
    Json reseeds = Json::array();
    for (const auto& e : res.diagnostics.reseeds)
        reseeds.push_back({{"iteration", e.iteration}, {"cluster", e.cluster}, {"sample", e.sample}});

    Json doc;
    doc["algorithm"] = report.algorithm;
    doc["config"] = std::move(config);
    doc["dataset"] = {{"name", report.dataset_name}, {"n", report.n}, {"d", report.d}};
    if (report.acc) doc["acc"] = *report.acc;
    if (report.nmi) doc["nmi"] = *report.nmi;
    doc["iterations"] = res.iterations;
    doc["converged"] = res.converged;
    doc["final_objective"] = res.objective_trace.empty() ? 0.0 : res.objective_trace.back();
    doc["objective_trace"] = res.objective_trace;
    doc["labels"] = res.labels;
    doc["diagnostics"] = {{"reseed_events", std::move(reseeds)},
                          {"degenerate_rows_total", res.diagnostics.degenerate_rows},
                          {"degenerate_rows_final", res.diagnostics.final_degenerate_rows},
                          {"warnings", report.warnings}};
    doc["wall_time_seconds"] = report.wall_time_seconds;
    return doc;
}

std::vector<std::string> fit_args_from_report(const Json& report) {
    const auto& cfg = report.at("config");
    std::vector<std::string> args{"fit",
                                  "--algo", cfg.at("algo").get<std::string>(),
                                  "--data", cfg.at("data").get<std::string>(),
                                  "--labels-col", cfg.at("labels_col").get<std::string>(),
                                  "--normalize", cfg.at("normalize").get<std::string>(),
                                  "--c", std::to_string(cfg.at("c").get<int>()),
                                  "--tol", format_double(cfg.at("tol").get<double>()),
                                  "--max-iter", std::to_string(cfg.at("max_iter").get<int>()),
                                  "--init", cfg.at("init").get<std::string>(),
                                  "--seed", std::to_string(cfg.at("seed").get<std::uint64_t>())};
    if (cfg.at("header").get<bool>()) args.emplace_back("--header");
    if (!cfg.at("k_tilde").is_null()) {
        args.emplace_back("--k-tilde");
        args.push_back(std::to_string(cfg.at("k_tilde").get<int>()));
    }
    if (!cfg.at("r").is_null()) {
        args.emplace_back("--r");
        args.push_back(format_double(cfg.at("r").get<double>()));
    }
    return args;
}

std::vector<SweepRow> aggregate_sweep(const std::vector<SweepCell>& cells) {
    std::vector<SweepRow> rows;
    std::vector<std::vector<const SweepCell*>> groups;
    for (const auto& cell : cells) {
        auto it = std::find_if(rows.begin(), rows.end(), [&](const SweepRow& row) {
            return row.k_tilde == cell.k_tilde && row.r == cell.r;
        });
        if (it == rows.end()) {
            SweepRow row;
            row.k_tilde = cell.k_tilde;
            row.r = cell.r;
            rows.push_back(row);
            groups.emplace_back();
            it = rows.end() - 1;
        }
        groups[static_cast<std::size_t>(it - rows.begin())].push_back(&cell);
    }

    auto mean_std = [](const std::vector<double>& v) -> std::pair<double, double> {
        if (v.empty()) return {std::nan(""), std::nan("")};
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        if (v.size() < 2) return {mean, 0.0};
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
    };

    for (std::size_t g = 0; g < rows.size(); ++g) {
        std::vector<double> accs, nmis;
        for (const auto* cell : groups[g]) {
            ++rows[g].runs;
            if (cell->status != "ok") {
                ++rows[g].failed;
                continue;
            }
            if (cell->acc) accs.push_back(*cell->acc);
            if (cell->nmi) nmis.push_back(*cell->nmi);
        }
        std::tie(rows[g].acc_mean, rows[g].acc_std) = mean_std(accs);
        std::tie(rows[g].nmi_mean, rows[g].nmi_std) = mean_std(nmis);
    }
    return rows;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("loglog_slope: need at least two matching points");
    const auto m = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += std::log(x[i]);
        sy += std::log(y[i]);
    }
    const double mx = sx / m, my = sy / m;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

BenchTable bench_scaling(const BenchOptions& options) {
    if (options.sizes.empty()) throw CliError(kExitConfigError, "invalid config", "--sizes is empty");
    if (!std::is_sorted(options.sizes.begin(), options.sizes.end()))
        throw CliError(kExitConfigError, "invalid config", "--sizes must be ascending");
    if (options.iterations < 1 || options.repeats < 1 || options.dim < 1 || options.c < 2)
        throw CliError(kExitConfigError, "invalid config", "bench parameters out of range");

    // Cluster centres are shared across sizes so only n changes.
    Rng rng(options.seed);
    std::vector<std::vector<double>> centers(options.c, std::vector<double>(options.dim));
    for (auto& center : centers)
        for (double& v : center) v = rng.uniform(0.0, 10.0);

    BenchTable table;
    for (std::size_t n : options.sizes) {
        if (n < options.c) throw CliError(kExitConfigError, "invalid config", "size below cluster count");
        io::BlobSpec spec;
        spec.rng_seed = options.seed + 1;
        for (std::size_t k = 0; k < options.c; ++k)
            spec.clusters.push_back(
                {centers[k], 1.0, n / options.c + (k < n % options.c ? 1 : 0)});
        const auto dataset = io::generate_blobs(spec);

        FitConfig config;
        config.cluster_count = static_cast<int>(options.c);
        config.k_tilde = options.k_tilde;
        config.fuzzifier = options.r;
        config.rng_seed = options.seed;
        config.init = baselines::random_sample_seed(dataset.data, options.c, options.seed);
        try {
            (void)validate_config(config, dataset.data);
            double best = std::numeric_limits<double>::infinity();
            for (int rep = 0; rep < options.repeats; ++rep) {
                const auto started = std::chrono::steady_clock::now();
                const auto result = run_iterations(dataset.data, config, options.iterations);
                const auto elapsed = std::chrono::steady_clock::now() - started;
                best = std::min(best, std::chrono::duration<double>(elapsed).count());
                (void)result;
            }
            table.rows.push_back({n, best, best / options.iterations});
        } catch (const ConfigError& e) {
            throw CliError(kExitConfigError, "invalid config", e.what());
        }
    }
    if (table.rows.size() >= 2) {
        std::vector<double> xs, ys;
        for (const auto& row : table.rows) {
            xs.push_back(static_cast<double>(row.n));
            ys.push_back(row.seconds_per_iteration);
        }
        table.loglog_slope = loglog_slope(xs, ys);
    }
    return table;
}

namespace {

void add_data_options(CLI::App& cmd, RunOptions& o) {
    cmd.add_option("--data", o.data_path, "CSV dataset")->required();
    cmd.add_option("--labels-col", o.labels_col, "Label column: index, last or none");
    cmd.add_flag("--header", o.header, "First CSV line is a header");
    cmd.add_option("--normalize", o.normalize, "none, minmax or zscore");
}

void add_model_options(CLI::App& cmd, RunOptions& o, int& k_tilde_raw) {
    cmd.add_option("--algo", o.algo, "kmeans, fcm, sim-refcmfs or refcmfs");
    cmd.add_option("--c", o.c, "Number of clusters")->required();
    cmd.add_option("--k-tilde", k_tilde_raw, "Nonzero memberships per sample");
    cmd.add_option("--r", o.r, "Fuzzifier (> 1)");
    cmd.add_option("--tol", o.tol, "Relative objective-decrease threshold");
    cmd.add_option("--max-iter", o.max_iter, "Iteration cap");
    cmd.add_option("--init", o.init, "kmeanspp or random");
    cmd.add_option("--seed", o.seed, "RNG seed");
}

std::string trace_text(const FitResult& result) {
    std::string text;
    for (std::size_t t = 0; t < result.objective_trace.size(); ++t)
        text += std::to_string(t + 1) + ' ' + format_double(result.objective_trace[t]) + '\n';
    return text;
}

std::string sweep_summary_csv(const std::vector<SweepRow>& rows) {
    std::string text = "k_tilde,r,runs,failed,acc_mean,acc_std,nmi_mean,nmi_std\n";
    for (const auto& row : rows) {
        text += std::to_string(row.k_tilde) + ',' + format_double(row.r) + ',' +
                std::to_string(row.runs) + ',' + std::to_string(row.failed) + ',' +
                format_double(row.acc_mean) + ',' + format_double(row.acc_std) + ',' +
                format_double(row.nmi_mean) + ',' + format_double(row.nmi_std) + '\n';
    }
    return text;
}

std::string sweep_runs_csv(const std::vector<SweepCell>& cells) {
    std::string text = "k_tilde,r,seed,status,acc,nmi,iterations,final_objective\n";
    for (const auto& cell : cells) {
        text += std::to_string(cell.k_tilde) + ',' + format_double(cell.r) + ',' +
                std::to_string(cell.seed) + ',' + cell.status + ',' +
                (cell.acc ? format_double(*cell.acc) : "") + ',' +
                (cell.nmi ? format_double(*cell.nmi) : "") + ',' +
                std::to_string(cell.iterations) + ',' + format_double(cell.final_objective) + '\n';
    }
    return text;
}

std::string bench_text(const BenchOptions& o, const BenchTable& table) {
    std::string text = "n,d,c,k_tilde,iterations,seconds,seconds_per_iteration\n";
    for (const auto& row : table.rows)
        text += std::to_string(row.n) + ',' + std::to_string(o.dim) + ',' + std::to_string(o.c) +
                ',' + std::to_string(o.k_tilde) + ',' + std::to_string(o.iterations) + ',' +
                format_double(row.seconds) + ',' + format_double(row.seconds_per_iteration) + '\n';
    if (table.loglog_slope) text += "# loglog_slope " + format_double(*table.loglog_slope) + '\n';
    return text;
}

void report_error(std::ostream& err, const std::string& kind, const std::string& detail, int code) {
    Json line{{"error", kind}, {"detail", detail}, {"exit_code", code}};
    err << line.dump() << '\n';
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sparse robust fuzzy C-means clustering experiments", "refcmfs"};
    app.require_subcommand(1);

    RunOptions fit_opts, trace_opts, sweep_opts;
    int fit_k = -1, trace_k = -1, sweep_k = -1;
    std::string fit_out, trace_out, trace_report, sweep_out, sweep_runs_out, bench_out;

    auto* fit_cmd = app.add_subcommand("fit", "Run one algorithm once and print a JSON report");
    add_data_options(*fit_cmd, fit_opts);
    add_model_options(*fit_cmd, fit_opts, fit_k);
    fit_cmd->add_option("--out", fit_out, "Write the report here instead of stdout");

    auto* trace_cmd = app.add_subcommand("trace", "Print (iteration, objective) pairs of one run");
    add_data_options(*trace_cmd, trace_opts);
    add_model_options(*trace_cmd, trace_opts, trace_k);
    trace_cmd->add_option("--out", trace_out, "Write the trace here instead of stdout");
    trace_cmd->add_option("--report", trace_report, "Also write the JSON run report here");

    std::string k_grid_text, r_grid_text = "1.1,1.2,1.3,1.4,1.5";
    int seeds = 10;
    auto* sweep_cmd = app.add_subcommand("sweep", "Grid over (k_tilde, r) and seeds");
    add_data_options(*sweep_cmd, sweep_opts);
    add_model_options(*sweep_cmd, sweep_opts, sweep_k);
    sweep_cmd->add_option("--k-tilde-grid", k_grid_text, "Comma list; default 2..c-1");
    sweep_cmd->add_option("--r-grid", r_grid_text, "Comma list of fuzzifiers");
    sweep_cmd->add_option("--seeds", seeds, "Runs per grid point (seeds seed..seed+N-1)");
    sweep_cmd->add_option("--out", sweep_out, "Write the summary table here instead of stdout");
    sweep_cmd->add_option("--runs-out", sweep_runs_out, "Write per-run rows here");

    BenchOptions bench;
    std::string sizes_text = "10000,20000,40000";
    auto* bench_cmd = app.add_subcommand("bench", "Per-iteration time against n");
    bench_cmd->add_option("--sizes", sizes_text, "Ascending comma list of sample counts");
    bench_cmd->add_option("--dim", bench.dim, "Feature count");
    bench_cmd->add_option("--c", bench.c, "Cluster count");
    bench_cmd->add_option("--k-tilde", bench.k_tilde, "Nonzero memberships per sample");
    bench_cmd->add_option("--r", bench.r, "Fuzzifier");
    bench_cmd->add_option("--iters", bench.iterations, "Fixed iteration count");
    bench_cmd->add_option("--repeats", bench.repeats, "Best-of repeats per size");
    bench_cmd->add_option("--seed", bench.seed, "RNG seed");
    bench_cmd->add_option("--out", bench_out, "Write the table here instead of stdout");

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
        report_error(err, "invalid arguments", e.what(), kExitConfigError);
        return kExitConfigError;
    }

    try {
        auto finish_options = [](RunOptions& o, int k_raw, CLI::App& cmd) {
            if (cmd.count("--k-tilde") > 0) o.k_tilde = k_raw;
            (void)parse_algorithm(o.algo);
        };

        if (fit_cmd->parsed()) {
            finish_options(fit_opts, fit_k, *fit_cmd);
            const auto dataset = load_dataset(fit_opts);
            const auto report = run_once(dataset, fit_opts);
            emit(to_json(report).dump(2) + '\n', fit_out, out);
        } else if (trace_cmd->parsed()) {
            finish_options(trace_opts, trace_k, *trace_cmd);
            const auto dataset = load_dataset(trace_opts);
            const auto report = run_once(dataset, trace_opts);
            emit(trace_text(report.result), trace_out, out);
            if (!trace_report.empty()) write_file(trace_report, to_json(report).dump(2) + '\n');
        } else if (sweep_cmd->parsed()) {
            finish_options(sweep_opts, sweep_k, *sweep_cmd);
            if (seeds < 1) throw CliError(kExitConfigError, "invalid config", "--seeds must be positive");
            std::vector<int> k_grid;
            if (!k_grid_text.empty()) {
                k_grid = parse_list<int>(k_grid_text, "--k-tilde-grid");
            } else if (sweep_opts.c > 2) {
                for (int k = 2; k < sweep_opts.c; ++k) k_grid.push_back(k);
            } else {
                k_grid.push_back(1);
            }
            const auto r_grid = parse_list<double>(r_grid_text, "--r-grid");
            const auto dataset = load_dataset(sweep_opts);
            if (!dataset.labels)
                throw CliError(kExitConfigError, "invalid config", "sweep needs --labels-col");

            std::vector<SweepCell> cells;
            for (int k : k_grid)
                for (double r : r_grid)
                    for (int s = 0; s < seeds; ++s) {
                        RunOptions cell_opts = sweep_opts;
                        cell_opts.k_tilde = k;
                        cell_opts.r = r;
                        cell_opts.seed = sweep_opts.seed + static_cast<std::uint64_t>(s);
                        SweepCell cell;
                        cell.k_tilde = k;
                        cell.r = r;
                        cell.seed = cell_opts.seed;
                        try {
                            const auto report = run_once(dataset, cell_opts);
                            cell.acc = report.acc;
                            cell.nmi = report.nmi;
                            cell.iterations = report.result.iterations;
                            cell.final_objective = report.result.objective_trace.back();
                        } catch (const CliError& e) {
                            if (e.code() == kExitUnknownAlgorithm) throw;
                            cell.status = "invalid config";
                        }
                        cells.push_back(cell);
                    }
            emit(sweep_summary_csv(aggregate_sweep(cells)), sweep_out, out);
            if (!sweep_runs_out.empty()) write_file(sweep_runs_out, sweep_runs_csv(cells));
        } else if (bench_cmd->parsed()) {
            bench.sizes = parse_list<std::size_t>(sizes_text, "--sizes");
            emit(bench_text(bench, bench_scaling(bench)), bench_out, out);
        }
    } catch (const CliError& e) {
        report_error(err, e.kind(), e.what(), e.code());
        return e.code();
    }
    return kExitOk;
}

} // namespace refcmfs::cli
